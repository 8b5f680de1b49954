"""Model persistence.

One self-describing binary container per model: a magic string, a format
version, a JSON header (config, stage metadata, SVM metadata, array
manifest) and the raw little-endian array payloads. Writing is fully
deterministic, so identical runs produce byte-identical files.
"""

import json
import struct

import numpy as np

from .config import ExperimentConfig
from .errors import ModelFormatError
from .filterbank import FilterBank, StageFilters
from .pipeline import TrainedModel
from .svm import SvmModel

MAGIC = b"CSNETMDL"
FORMAT_VERSION = 1


def _manifest_entry(name: str, arr: np.ndarray):
    kind = "f8" if arr.dtype.kind == "f" else "i8"
    return {"name": name, "dtype": kind, "shape": list(arr.shape)}


def _payload(arr: np.ndarray) -> bytes:
    kind = "<f8" if arr.dtype.kind == "f" else "<i8"
    return np.ascontiguousarray(arr).astype(kind).tobytes()


def save_model(model: TrainedModel, path) -> None:
    arrays = []
    stage_meta = []
    for s, stage in enumerate(model.bank.stages):
        arrays.append((f"stage{s}_filters", stage.filters))
        if stage.dct_vectors is not None:
            arrays.append((f"stage{s}_dct_vectors", stage.dct_vectors))
        if stage.column_energies is not None:
            arrays.append((f"stage{s}_column_energies", stage.column_energies))
        stage_meta.append(
            {
                "method": stage.method,
                "seed": stage.seed,
                "k_sparsity": stage.k_sparsity,
                "m_measurements": stage.m_measurements,
                "has_dct_vectors": stage.dct_vectors is not None,
                "has_column_energies": stage.column_energies is not None,
            }
        )
    arrays.append(("svm_classes", model.svm.classes.astype(np.int64)))
    arrays.append(("svm_weights", model.svm.weights))
    arrays.append(("svm_biases", model.svm.biases))

    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "bank": {"k1": model.bank.k1, "k2": model.bank.k2, "stages": stage_meta},
        "svm": {
            "c_param": model.svm.c_param,
            "training_meta": model.svm.training_meta,
        },
        "arrays": [_manifest_entry(name, arr) for name, arr in arrays],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()

    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(header_bytes)))
        f.write(header_bytes)
        for _, arr in arrays:
            f.write(_payload(arr))


def load_model(path) -> TrainedModel:
    with open(path, "rb") as f:
        buf = f.read()
    if buf[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f"{path}: not a csnet model file (bad magic)")
    offset = len(MAGIC)
    (version,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model format version {version} "
            f"(this build reads version {FORMAT_VERSION})"
        )
    (header_len,) = struct.unpack_from("<Q", buf, offset)
    offset += 8
    try:
        header = json.loads(buf[offset : offset + header_len].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt model header ({exc})") from exc
    offset += header_len

    data = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape, initial=1))
        nbytes = n * 8
        if offset + nbytes > len(buf):
            raise ModelFormatError(
                f"{path}: truncated array payload for {entry['name']}"
            )
        dtype = "<f8" if entry["dtype"] == "f8" else "<i8"
        data[entry["name"]] = np.frombuffer(
            buf, dtype=dtype, count=n, offset=offset
        ).reshape(shape).copy()
        offset += nbytes

    config = ExperimentConfig.from_dict(header["config"])
    stages = []
    for s, meta in enumerate(header["bank"]["stages"]):
        stages.append(
            StageFilters(
                filters=data[f"stage{s}_filters"],
                method=meta["method"],
                seed=meta["seed"],
                k_sparsity=meta["k_sparsity"],
                m_measurements=meta["m_measurements"],
                dct_vectors=data.get(f"stage{s}_dct_vectors"),
                column_energies=data.get(f"stage{s}_column_energies"),
            )
        )
    bank = FilterBank(
        stages=tuple(stages), k1=header["bank"]["k1"], k2=header["bank"]["k2"]
    )
    svm = SvmModel(
        classes=data["svm_classes"],
        weights=data["svm_weights"],
        biases=data["svm_biases"],
        c_param=header["svm"]["c_param"],
        training_meta=header["svm"]["training_meta"],
    )
    return TrainedModel(config=config, bank=bank, svm=svm, format_version=version)
