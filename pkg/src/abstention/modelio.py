"""Versioned JSON model files.

Floats are written with ``repr`` precision by the json module, so a load of a
dump reproduces every number exactly.
"""
from __future__ import annotations

import json

import numpy as np

from .histogram import BandwidthLadder, GridStats, HistogramEstimator
from .plugin import PluginClassifier
from .surrogate import FourierFeatures, SurrogateModel

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _ints(a):
    return [int(v) for v in a]


def histogram_to_dict(est: HistogramEstimator) -> dict:
    lad = est.ladder
    return {
        "ladder": {"N": lad.N, "n": lad.n, "mu_min": lad.mu_min, "dim": lad.dim},
        "threshold_scale": est.threshold_scale,
        "L": est.L,
        "beta": est.beta,
        "grids": [
            {"h": g.h, "keys": _ints(g.keys), "positives": _ints(g.positives),
             "totals": _ints(g.totals), "global_fraction": g.global_fraction}
            for g in est.grids
        ],
    }


def histogram_from_dict(d: dict) -> HistogramEstimator:
    lad = BandwidthLadder(**d["ladder"])
    grids = []
    for g in d["grids"]:
        keys = g["keys"]
        big = any(k >= 2**63 for k in keys)
        grids.append(GridStats(
            g["h"], lad.dim,
            np.array(keys, dtype=object if big else np.int64),
            np.array(g["positives"], dtype=np.int64),
            np.array(g["totals"], dtype=np.int64),
            g["global_fraction"],
        ))
    return HistogramEstimator(lad, tuple(grids), d["threshold_scale"], d["L"], d["beta"])


def _float_list(a):
    return [float(v) for v in np.ravel(a)]


def to_dict(model) -> dict:
    if isinstance(model, HistogramEstimator):
        body = {"kind": "histogram", "estimator": histogram_to_dict(model)}
    elif isinstance(model, PluginClassifier):
        body = {
            "kind": "plugin",
            "estimator": histogram_to_dict(model.estimator),
            "gamma_hat": model.gamma_hat, "band": model.band, "c_hat": model.c_hat,
            "a_m": model.a_m, "delta": model.delta, "p1_hat": model.p1_hat,
            "p2_hat": model.p2_hat, "core_empty": model.core_empty,
        }
    elif isinstance(model, SurrogateModel):
        f = model.features
        body = {
            "kind": "surrogate",
            "features": {"dim_in": f.dim_in, "dim_out": f.dim_out, "sigma": f.sigma,
                         "seed": f.seed, "W": _float_list(f.W), "b": _float_list(f.b)},
            "u": _float_list(model.u), "u0": float(model.u0),
            "v": _float_list(model.v), "v0": float(model.v0),
            "config": {k: v for k, v in model.config.items()},
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {"format": "abstention-model", "version": FORMAT_VERSION, **body}


def from_dict(d: dict):
    if d.get("format") != "abstention-model":
        raise ModelFormatError("not an abstention model file")
    if d.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {d.get('version')}")
    kind = d.get("kind")
    if kind == "histogram":
        return histogram_from_dict(d["estimator"])
    if kind == "plugin":
        return PluginClassifier(
            histogram_from_dict(d["estimator"]), d["gamma_hat"], d["band"], d["c_hat"],
            d["a_m"], d["delta"], d["p1_hat"], d["p2_hat"], d["core_empty"])
    if kind == "surrogate":
        f = d["features"]
        W = np.array(f["W"], dtype=float).reshape(f["dim_out"], f["dim_in"])
        feats = FourierFeatures(W, np.array(f["b"], dtype=float), f["sigma"], f["seed"])
        return SurrogateModel(feats, np.array(d["u"], dtype=float), d["u0"],
                              np.array(d["v"], dtype=float), d["v0"], d.get("config", {}))
    raise ModelFormatError(f"unknown model kind {kind!r}")


def dumps(model) -> str:
    return json.dumps(to_dict(model), indent=1, sort_keys=True)


def loads(text: str):
    try:
        return from_dict(json.loads(text))
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from None


def save(model, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(model))


def load(path: str):
    with open(path) as fh:
        return loads(fh.read())
