from .word2vec import W2VModel, band_matrix, cbow_context


__all__ = ("W2VModel", "band_matrix", "cbow_context")
