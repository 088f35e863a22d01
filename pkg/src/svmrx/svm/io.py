"""Versioned plain-text serialization of :class:`ReceiverModel`.

Layout (one record per line, whitespace separated)::

    svmrx-model 1
    technique ovo16
    kernel rbf 0.8731...          # kind, then scale for rbf
    c 1.0
    adc_bits 32
    dim 18
    standardize none              # or: standardize <2*dim floats: means then scales>
    meta {"alpha": 0.97, ...}     # JSON object
    pool <n>                      # followed by n lines of dim floats
    machines <m>                  # followed by m machine records
    machine <label ints> | <bias> | <k>
    indices <k ints into pool>
    weights <k floats>
    end

Floats are written with ``repr`` and therefore parse back to the identical
binary value, so a reloaded model reproduces decision values exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from ..errors import IoError
from .kernels import KernelSpec
from .multiclass import ReceiverModel, Standardizer

MAGIC = "svmrx-model"
VERSION = 1


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def dumps(model: ReceiverModel) -> str:
    """Serialize ``model`` to text."""
    k = model.kernel
    lines = [
        f"{MAGIC} {VERSION}",
        f"technique {model.technique}",
        f"kernel {k.kind}" + (f" {k.scale!r}" if k.kind == "rbf" else ""),
        f"c {float(model.c)!r}",
        f"adc_bits {int(model.adc_bits)}",
        f"dim {model.dim}",
    ]
    if model.standardizer is None:
        lines.append("standardize none")
    else:
        s = model.standardizer
        lines.append("standardize " + _floats(np.concatenate([s.mean, s.scale])))
    lines.append("meta " + json.dumps(model.meta, sort_keys=True))
    lines.append(f"pool {model.pool.shape[0]}")
    lines.extend(_floats(row) for row in model.pool)
    lines.append(f"machines {len(model.members)}")
    for label, idx, w, b in zip(model.labels, model.members, model.weights, model.biases):
        lines.append(f"machine {' '.join(map(str, label))} | {float(b)!r} | {len(idx)}")
        lines.append("indices " + " ".join(str(int(i)) for i in idx))
        lines.append("weights " + _floats(w))
    lines.append("end")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, key: str | None = None) -> list[str]:
        if self.pos >= len(self.lines):
            raise IoError("model file truncated")
        parts = self.lines[self.pos].split()
        self.pos += 1
        if key is not None and (not parts or parts[0] != key):
            raise IoError(f"model file line {self.pos}: expected '{key}'")
        return parts[1:] if key is not None else parts


def loads(text: str) -> ReceiverModel:
    """Parse text produced by :func:`dumps`."""
    rd = _Reader(text)
    try:
        head = rd.next()
        if head[:1] != [MAGIC] or len(head) != 2:
            raise IoError("not an svmrx model file")
        if int(head[1]) != VERSION:
            raise IoError(f"unsupported model version {head[1]}")
        technique = rd.next("technique")[0]
        kparts = rd.next("kernel")
        kernel = KernelSpec(kparts[0], float(kparts[1]) if kparts[0] == "rbf" else None)
        c = float(rd.next("c")[0])
        adc_bits = int(rd.next("adc_bits")[0])
        dim = int(rd.next("dim")[0])
        sparts = rd.next("standardize")
        std = None
        if sparts != ["none"]:
            vals = np.array([float(v) for v in sparts])
            std = Standardizer(vals[:dim], vals[dim:])
        meta_line = rd.lines[rd.pos]
        if not meta_line.startswith("meta "):
            raise IoError(f"model file line {rd.pos + 1}: expected 'meta'")
        meta = json.loads(meta_line[5:])
        rd.pos += 1
        n_pool = int(rd.next("pool")[0])
        pool = np.array([[float(v) for v in rd.next()] for _ in range(n_pool)]).reshape(n_pool, dim)
        n_m = int(rd.next("machines")[0])
        labels, members, weights, biases = [], [], [], []
        for _ in range(n_m):
            fields = " ".join(rd.next("machine")).split("|")
            labels.append(tuple(int(v) for v in fields[0].split()))
            biases.append(float(fields[1]))
            k = int(fields[2])
            idx = np.array([int(v) for v in rd.next("indices")], dtype=np.int64)
            w = np.array([float(v) for v in rd.next("weights")])
            if idx.size != k or w.size != k:
                raise IoError("machine record length mismatch")
            members.append(idx)
            weights.append(w)
        rd.next("end")
    except (ValueError, IndexError) as exc:
        raise IoError(f"malformed model file: {exc}") from None
    return ReceiverModel(technique, kernel, pool, members, weights, np.array(biases), labels, adc_bits, c, std, meta)


def save_model(model: ReceiverModel, path) -> None:
    """Write ``model`` atomically (temporary file plus rename)."""
    write_atomic(Path(path), dumps(model))


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to a temporary sibling of ``path``, then rename it over ``path``."""
    tmp = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise IoError(f"cannot write {path}: {exc}") from None


def load_model(path) -> ReceiverModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read model {path}: {exc}") from None
    return loads(text)
