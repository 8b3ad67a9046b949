"""Model and classifier serialization.

A single model file is a compact little-endian binary:

    magic "FCMX" | format version u16 | k u8 | alphabet length u16 |
    alphabet utf-8 | entry count u64 | entries | crc32 u32

Each entry is 17 bytes: context key u64, symbol u8, count u64, sorted by
(context, symbol).  The checksum covers every preceding byte.  Serialized
bytes are a pure function of the model's counts, so equal models always
produce identical files.

A classifier bundle is a directory holding the two model files plus a
``manifest.json`` naming them and carrying the labels, the smoothing
constant and the lowercasing flag.
"""

from __future__ import annotations

import json
import os
import re
import struct
import tempfile
import zlib
from pathlib import Path

import numpy as np

from fcmdetect.alphabet import Alphabet, custom_alphabet
from fcmdetect.classifier import BinaryClassifier
from fcmdetect.fcm import ContextModel

MAGIC = b"FCMX"
FORMAT_VERSION = 1
MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"

_HEADER = struct.Struct("<4sHB")  # magic, version, k
_ALPHA_LEN = struct.Struct("<H")
_COUNT = struct.Struct("<Q")
_CRC = struct.Struct("<I")
_ENTRY_DTYPE = np.dtype([("ctx", "<u8"), ("sym", "u1"), ("count", "<u8")])
# Stream entries to disk in slabs of this many to bound temp memory.
_ENTRY_CHUNK = 2_000_000


class ModelFileError(ValueError):
    """Base error for unreadable or malformed model files."""


class BadMagicError(ModelFileError):
    """The file does not start with the model magic bytes."""


class UnsupportedVersionError(ModelFileError):
    """The file declares a format version this build cannot read."""


class ChecksumError(ModelFileError):
    """The payload does not match its trailing checksum."""


class BundleError(ValueError):
    """A classifier bundle is missing pieces or is inconsistent."""


def _atomic_write(path: Path, write_body) -> None:
    """Write via a temp file in the target directory, then rename over."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            write_body(fh)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def save_model(model: ContextModel, alphabet: Alphabet, path: str | Path) -> None:
    """Serialize ``model`` (with the alphabet it indexes into) to ``path``.

    The write is atomic: the file appears complete or not at all.
    """
    if alphabet.size != model.alphabet_size:
        raise ModelFileError(
            f"alphabet has {alphabet.size} symbols but the model expects {model.alphabet_size}"
        )
    path = Path(path)
    ctx, sym, count = model.entry_arrays()
    alpha_bytes = alphabet.as_string().encode("utf-8")
    if len(alpha_bytes) > 0xFFFF:
        raise ModelFileError("alphabet too large to serialize")

    def body(fh) -> None:
        crc = 0

        def put(data: bytes) -> None:
            nonlocal crc
            crc = zlib.crc32(data, crc)
            fh.write(data)

        put(_HEADER.pack(MAGIC, FORMAT_VERSION, model.k))
        put(_ALPHA_LEN.pack(len(alpha_bytes)))
        put(alpha_bytes)
        put(_COUNT.pack(len(ctx)))
        for start in range(0, len(ctx), _ENTRY_CHUNK):
            stop = start + _ENTRY_CHUNK
            block = np.empty(len(ctx[start:stop]), dtype=_ENTRY_DTYPE)
            block["ctx"] = ctx[start:stop]
            block["sym"] = sym[start:stop]
            block["count"] = count[start:stop]
            put(block.tobytes())
        fh.write(_CRC.pack(crc))

    _atomic_write(path, body)


def load_model(path: str | Path) -> tuple[ContextModel, Alphabet]:
    """Read a model file back into a model and its alphabet.

    Checks, in order: magic bytes, format version, checksum, then structural
    validity (symbol range, context range, strictly increasing entry order,
    positive counts).  Each failure raises its own error type.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size + _CRC.size:
        raise ModelFileError(f"{path}: file too short to be a model file")
    magic = data[:4]
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    _, version, k = _HEADER.unpack_from(data, 0)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: format version {version} not supported (expected {FORMAT_VERSION})"
        )
    stored_crc = _CRC.unpack_from(data, len(data) - _CRC.size)[0]
    actual_crc = zlib.crc32(data[: -_CRC.size])
    if stored_crc != actual_crc:
        raise ChecksumError(f"{path}: checksum mismatch, file is corrupt or truncated")

    offset = _HEADER.size
    (alpha_len,) = _ALPHA_LEN.unpack_from(data, offset)
    offset += _ALPHA_LEN.size
    try:
        alpha_str = data[offset : offset + alpha_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFileError(f"{path}: alphabet is not valid utf-8") from exc
    if len(alpha_str.encode("utf-8")) != alpha_len or len(data) < offset + alpha_len:
        raise ModelFileError(f"{path}: truncated alphabet block")
    offset += alpha_len
    try:
        alphabet = custom_alphabet(alpha_str)
    except ValueError as exc:
        raise ModelFileError(f"{path}: invalid alphabet in file: {exc}") from exc
    (n_entries,) = _COUNT.unpack_from(data, offset)
    offset += _COUNT.size
    body_len = len(data) - _CRC.size - offset
    if body_len != n_entries * _ENTRY_DTYPE.itemsize:
        raise ModelFileError(
            f"{path}: entry block is {body_len} bytes, expected {n_entries} entries "
            f"of {_ENTRY_DTYPE.itemsize}"
        )
    if k < 1:
        raise ModelFileError(f"{path}: invalid context order {k}")
    size = alphabet.size
    if size**k > 2**63 - 1:
        raise ModelFileError(f"{path}: state space {size}^{k} out of range")

    entries = np.frombuffer(data, dtype=_ENTRY_DTYPE, count=n_entries, offset=offset)
    ctx = entries["ctx"]
    sym = entries["sym"]
    count = entries["count"]
    if n_entries:
        if int(ctx.max()) >= size**k:
            raise ModelFileError(f"{path}: context key out of range for {size}^{k} states")
        if int(sym.max()) >= size:
            raise ModelFileError(f"{path}: symbol index out of range for alphabet size {size}")
        if int(count.min()) < 1:
            raise ModelFileError(f"{path}: zero count entry; files store only observed pairs")
        if int(count.max()) > 2**62:
            raise ModelFileError(f"{path}: count exceeds the supported range")
    if n_entries > 1:
        # Strict (ctx, sym) ordering, checked without building combined keys
        # so it cannot overflow for any legal k and alphabet size.
        dc = np.diff(ctx.astype(object) if size**k > 2**62 else ctx.astype(np.int64))
        ds = np.diff(sym.astype(np.int16))
        ordered = (dc > 0) | ((dc == 0) & (ds > 0))
        if not bool(np.all(ordered)):
            raise ModelFileError(f"{path}: entries are not strictly sorted by (context, symbol)")

    if size ** (k + 1) <= 2**63 - 1:
        keys = ctx.astype(np.int64) * size + sym.astype(np.int64)
    else:
        keys = np.array(
            [int(c) * size + int(s) for c, s in zip(ctx.tolist(), sym.tolist())], dtype=object
        )
    counts = count.astype(np.int64)
    model = ContextModel.from_sorted_entries(k, size, keys, counts)
    return model, alphabet


# ----------------------------------------------------------------------
# classifier bundles


def _model_filename(label: str, fallback: str) -> str:
    safe = re.sub(r"[^a-z0-9_-]", "", label.lower())
    return f"model_{safe or fallback}.fcm"


def save_bundle(classifier: BinaryClassifier, out_dir: str | Path) -> Path:
    """Write both class models plus a manifest into ``out_dir``.

    Returns the manifest path.  Model filenames derive from the labels.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    file_a = _model_filename(classifier.label_a, "a")
    file_b = _model_filename(classifier.label_b, "b")
    if file_a == file_b:
        file_a, file_b = "model_a.fcm", "model_b.fcm"
    save_model(classifier.model_a, classifier.alphabet, out_dir / file_a)
    save_model(classifier.model_b, classifier.alphabet, out_dir / file_b)
    manifest = {
        "version": MANIFEST_VERSION,
        "label_a": classifier.label_a,
        "label_b": classifier.label_b,
        "model_a_path": file_a,
        "model_b_path": file_b,
        "alpha": classifier.alpha,
        "lowercase": classifier.lowercase,
    }
    manifest_path = out_dir / MANIFEST_NAME
    _atomic_write(
        manifest_path,
        lambda fh: fh.write((json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()),
    )
    return manifest_path


def load_bundle(path: str | Path) -> BinaryClassifier:
    """Load a classifier bundle from a manifest path or its directory."""
    path = Path(path)
    manifest_path = path / MANIFEST_NAME if path.is_dir() else path
    if not manifest_path.is_file():
        raise BundleError(f"no bundle manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise BundleError(f"{manifest_path}: manifest is not valid JSON: {exc}") from exc
    required = {"version", "label_a", "label_b", "model_a_path", "model_b_path", "alpha", "lowercase"}
    missing = required - manifest.keys()
    if missing:
        raise BundleError(f"{manifest_path}: manifest missing keys {sorted(missing)}")
    if manifest["version"] != MANIFEST_VERSION:
        raise BundleError(f"{manifest_path}: unsupported manifest version {manifest['version']}")
    base = manifest_path.parent
    model_a, alpha_a = load_model(base / manifest["model_a_path"])
    model_b, alpha_b = load_model(base / manifest["model_b_path"])
    if alpha_a.symbols != alpha_b.symbols:
        raise BundleError(f"{manifest_path}: the two model files use different alphabets")
    try:
        return BinaryClassifier(
            model_a=model_a,
            model_b=model_b,
            label_a=manifest["label_a"],
            label_b=manifest["label_b"],
            alphabet=alpha_a,
            alpha=manifest["alpha"],
            lowercase=bool(manifest["lowercase"]),
        )
    except ValueError as exc:
        raise BundleError(f"{manifest_path}: inconsistent bundle: {exc}") from exc
