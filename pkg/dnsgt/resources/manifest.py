import datetime
import logging
import os

from dnsgt import __version__
from dnsgt.definitions import MANIFEST_FILENAME
from dnsgt.mixins import CoolNameable, Hashable, Identifiable, MixinBase, Serialisable
from dnsgt.utils.hashing import calculate_file_hash


logger = logging.getLogger(__name__)


class RunManifest(Serialisable, Identifiable, CoolNameable, Hashable, MixinBase):
    """The provenance record written next to the outputs of every subcommand run: the configuration snapshot, the seed,
    and the hashes of the input and output files. The hash of a manifest covers everything apart from its id, name and
    creation time, so two runs with the same inputs and configuration share a hash.

    :param str subcommand:
    :param dict|None config: a snapshot of the run's configuration
    :param int|None seed:
    :param dict(str, str)|None inputs: input file hashes keyed by path
    :param dict(str, str)|None outputs: output file hashes keyed by path
    :param str|None id:
    :param str|None name:
    :param str|None version: the version of the package that produced the run
    :param str|None created_at: ISO-format creation time
    :return None:
    """

    _ATTRIBUTES_TO_HASH = ("subcommand", "config_items", "seed", "inputs", "version")
    _SERIALISE_FIELDS = ("id", "name", "subcommand", "version", "created_at", "config", "seed", "inputs", "outputs")

    def __init__(
        self,
        subcommand,
        config=None,
        seed=None,
        inputs=None,
        outputs=None,
        id=None,
        name=None,
        version=None,
        created_at=None,
    ):
        super().__init__(id=id, name=name)
        self.subcommand = subcommand
        self.config = dict(config or {})
        self.seed = seed
        self.inputs = dict(inputs or {})
        self.outputs = dict(outputs or {})
        self.version = version or __version__
        self.created_at = created_at or datetime.datetime.now(datetime.timezone.utc).isoformat()

    @property
    def config_items(self):
        return {key: repr(value) for key, value in self.config.items()}

    def add_input(self, path):
        """Record an input file (or every file of an input directory) with its hash.

        :param str path:
        :return None:
        """
        for file_path in _files_at(path):
            self.inputs[file_path] = calculate_file_hash(file_path)

    def add_output(self, path):
        """Record an output file (or every file of an output directory) with its hash.

        :param str path:
        :return None:
        """
        for file_path in _files_at(path):
            if os.path.basename(file_path) != MANIFEST_FILENAME:
                self.outputs[file_path] = calculate_file_hash(file_path)

    def write(self, directory):
        """Write the manifest into a directory.

        :param str directory:
        :return str: the path of the manifest file
        """
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, MANIFEST_FILENAME)
        self.to_file(path)
        logger.info("Wrote manifest of run %r (%s) to %r.", self.name, self.subcommand, path)
        return path


def _files_at(path):
    if os.path.isfile(path):
        return [path]

    if not os.path.isdir(path):
        return []

    return sorted(os.path.join(root, name) for root, _, names in os.walk(path) for name in names)
