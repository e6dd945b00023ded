"""Experiment configuration: dataclasses plus a JSON round trip.

Schema (all keys optional unless noted)::

    {
      "name": "table1-qd",
      "model": {"kind": "MP1", "k": 160.0, "nu": 0.0, "l1": 0, "l2": 0,
                "rhs_kind": "centered_delta", "rhs_sign": -1.0,
                "x_axis": {"n": 256, "m_lo": 64, "m_hi": 64, "a": 1.0,
                           "w": 0.25, "theta": 0.5236},
                "y_axis": {...}},                       # defaults to x_axis
      "preconditioner": {"kind": "qd", "lambda0": -26000.0, ...},
      "multigrid": {"nu1": 1, "nu2": 1, "gamma_f": 1, "gamma_c": 1,
                    "smoother": "rb_jacobi", "omega": 1.0, "tol": 1e-6, ...},
      "krylov": {"tol": 1e-6, "max_iter": 2000, "warm_start": false,
                 "warm_start_tol": 0.01},
      "outputs": {"report": null, "field": null, "spectrum": null},
      "lambda0_source": "reference",
      "reference": {"mg_conv": 0.09, "mg_cycles": 6, "iterations": 170}
    }

Complex numbers are written as ``[re, im]``.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .krylov import KrylovConfig
from .multigrid import MgConfig
from .operators import AxisSpec, ConfigurationError, ModelProblem
from .preconditioners import PreconditionerSpec

OUTPUT_DIR_ENV = "ECSMG_OUTPUT_DIR"


@dataclass(frozen=True)
class Outputs:
    report: Optional[str] = None
    field: Optional[str] = None
    spectrum: Optional[str] = None

    def resolved(self, name: str) -> "Outputs":
        """Apply ``$ECSMG_OUTPUT_DIR`` to relative paths."""
        base = os.environ.get(OUTPUT_DIR_ENV)
        if not base:
            return self

        def fix(p):
            if p is None or os.path.isabs(p):
                return p
            return str(Path(base) / p)
        return Outputs(fix(self.report), fix(self.field), fix(self.spectrum))


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    model: ModelProblem
    preconditioner: PreconditionerSpec
    multigrid: MgConfig = MgConfig()
    krylov: KrylovConfig = KrylovConfig()
    outputs: Outputs = Outputs()
    lambda0_source: str = "auto"
    reference: dict = field(default_factory=dict, compare=True)

    def scaled(self, s: float) -> "ExperimentConfig":
        """Multiply every cell count by ``s``; lengths, k and tunables unchanged."""
        if s == 1:
            return self
        m = self.model
        model = dataclasses.replace(m, x_axis=m.x_axis.scaled(s), y_axis=m.y_axis.scaled(s))
        return dataclasses.replace(self, model=model, name=f"{self.name}@{s:g}")

    def provenance(self) -> dict:
        return {
            "name": self.name,
            "rhs_kind": self.model.rhs_kind,
            "rhs_sign": self.model.rhs_sign,
            "lambda0": _enc(self.preconditioner.lambda0),
            "lambda0_source": self.lambda0_source,
            "preconditioner": _asdict(self.preconditioner),
            "multigrid": _asdict(self.multigrid),
            "krylov": _asdict(self.krylov),
            "grid": {"x": _asdict(self.model.x_axis), "y": _asdict(self.model.y_axis)},
        }


def _enc(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _dec_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigurationError(f"complex value must be [re, im], got {v!r}")
        return complex(v[0], v[1])
    return v


def _asdict(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if callable(v):
            continue
        if dataclasses.is_dataclass(v):
            v = _asdict(v)
        out[f.name] = _enc(v)
    return out


def _build(cls, data: Optional[dict], **overrides):
    data = dict(data or {})
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigurationError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    data.update(overrides)
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid {cls.__name__}: {exc}") from exc


def to_dict(cfg: ExperimentConfig) -> dict:
    m = cfg.model
    model = {k: v for k, v in _asdict(m).items() if k != "rhs_func"}
    return {
        "name": cfg.name,
        "model": model,
        "preconditioner": _asdict(cfg.preconditioner),
        "multigrid": _asdict(cfg.multigrid),
        "krylov": _asdict(cfg.krylov),
        "outputs": _asdict(cfg.outputs),
        "lambda0_source": cfg.lambda0_source,
        "reference": dict(cfg.reference),
    }


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object")
    unknown = set(data) - {"name", "model", "preconditioner", "multigrid", "krylov",
                           "outputs", "lambda0_source", "reference"}
    if unknown:
        raise ConfigurationError(f"unknown top-level keys: {sorted(unknown)}")
    if "model" not in data:
        raise ConfigurationError("configuration needs a 'model' section")
    mdata = dict(data["model"])
    if "x_axis" not in mdata:
        raise ConfigurationError("model needs an 'x_axis' grid section")
    x_axis = _build(AxisSpec, mdata.pop("x_axis"))
    y_data = mdata.pop("y_axis", None)
    y_axis = _build(AxisSpec, y_data) if y_data is not None else None
    model = _build(ModelProblem, mdata, x_axis=x_axis, y_axis=y_axis)
    pdata = dict(data.get("preconditioner") or {})
    if "lambda0" in pdata:
        pdata["lambda0"] = _dec_complex(pdata["lambda0"])
    return ExperimentConfig(
        name=data.get("name", "experiment"),
        model=model,
        preconditioner=_build(PreconditionerSpec, pdata),
        multigrid=_build(MgConfig, data.get("multigrid")),
        krylov=_build(KrylovConfig, data.get("krylov")),
        outputs=_build(Outputs, data.get("outputs")),
        lambda0_source=data.get("lambda0_source", "auto"),
        reference=dict(data.get("reference") or {}),
    )


def dumps(cfg: ExperimentConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2)


def loads(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from exc
    return from_dict(data)


def load(path) -> ExperimentConfig:
    return loads(Path(path).read_text())


def save(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(dumps(cfg) + "\n")
