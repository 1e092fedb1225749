from .manifest import RunManifest


__all__ = ("RunManifest",)
