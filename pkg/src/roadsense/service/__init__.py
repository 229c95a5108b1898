from .bundle import FORMAT_VERSION, ModelBundle, feature_checksum, fnv1a_64, load_bundle, read_bundle, save_bundle, write_bundle
from .classify import classify_batch, encode_response, samples_from_json, samples_to_json
from .replay import ServiceUnavailable, replay_client
from .server import BUNDLE_ENV, ClassificationServer, make_server, serve

__all__ = [
    "BUNDLE_ENV",
    "FORMAT_VERSION",
    "ClassificationServer",
    "ModelBundle",
    "ServiceUnavailable",
    "classify_batch",
    "encode_response",
    "feature_checksum",
    "fnv1a_64",
    "load_bundle",
    "make_server",
    "read_bundle",
    "replay_client",
    "samples_from_json",
    "samples_to_json",
    "save_bundle",
    "serve",
    "write_bundle",
]
