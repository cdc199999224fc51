"""JSON serialization of matrices, families, probes, and POVMs.

Schemas
-------
matrix:  {"dim": d, "re": [[...]], "im": [[...]]}
family:  {"domain": {"type": "periodic"|"interval", "T": ...},
          "grid": [...], "states": [matrix, ...], "lipschitz": x}
probe:   {"n": n, "amps": [...]}
povm:    {"predictions": [...], "effects": [matrix, ...]}
solver:  {"tol": ..., "t0": ..., "t_factor": ..., "max_newton": ..., "max_outer": ...}
"""
from __future__ import annotations

import json

import numpy as np

from .families import Domain, StateFamily, PovmGrid, family_from_states
from .phase import ProbeSpectrum
from .solver import SolverConfig


def matrix_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": a.shape[0], "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(data: dict) -> np.ndarray:
    try:
        dim = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad matrix record: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(f"matrix blocks are not {dim}x{dim}")
    return re + 1j * im


def family_to_json(fam: StateFamily) -> dict:
    return {
        "domain": {"type": fam.domain.kind, "T": fam.domain.T},
        "grid": [float(t) for t in fam.grid],
        "states": [matrix_to_json(rho) for rho in fam.require_states()],
        "lipschitz": fam.lipschitz,
    }


def family_from_json(data: dict) -> StateFamily:
    try:
        domain = Domain(data["domain"]["type"], float(data["domain"]["T"]))
        states = [matrix_from_json(m) for m in data["states"]]
        lipschitz = data.get("lipschitz")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad family record: {exc}") from exc
    fam = family_from_states(domain, states, lipschitz)
    grid = np.asarray(data.get("grid", fam.grid), dtype=float)
    if len(grid) != fam.n_points:
        raise ValueError("grid length does not match the number of states")
    return fam


def probe_to_json(probe: ProbeSpectrum) -> dict:
    return {"n": probe.n, "amps": [float(a) for a in probe.amps]}


def probe_from_json(data: dict) -> ProbeSpectrum:
    try:
        return ProbeSpectrum(int(data["n"]), np.asarray(data["amps"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad probe record: {exc}") from exc


def povm_to_json(povm: PovmGrid) -> dict:
    return {
        "predictions": [float(t) for t in povm.predictions],
        "effects": [matrix_to_json(q) for q in povm.effects],
    }


def povm_from_json(data: dict) -> PovmGrid:
    try:
        effects = np.array([matrix_from_json(m) for m in data["effects"]])
        predictions = np.asarray(data["predictions"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad povm record: {exc}") from exc
    return PovmGrid(effects, predictions)


def solver_config_from_json(data: dict) -> SolverConfig:
    return SolverConfig.from_dict(data)


def load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from exc
