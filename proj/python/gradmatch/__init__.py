"""ODE parameter inference with ODE-penalised B-splines."""

from ._gradmatch import (
    Config,
    Dataset,
    Fit,
    ParameterBoundsError,
    SchemaError,
    chi2_threshold,
    load_dataset,
    oscillator_analytic,
)
from . import _gradmatch

__all__ = [
    "Config",
    "Dataset",
    "Fit",
    "ParameterBoundsError",
    "SchemaError",
    "chi2_threshold",
    "config",
    "fit",
    "generate",
    "load_dataset",
    "oscillator_analytic",
]


def config(**options):
    """Config with the given keys set; unknown keys raise KeyError."""
    cfg = Config()
    for key, value in options.items():
        if key.startswith("_") or not hasattr(cfg, key):
            raise KeyError(f"unknown config key '{key}'")
        setattr(cfg, key, value)
    return cfg


def generate(cfg=None, **options):
    """Simulated dataset; keyword options override `cfg`."""
    return _gradmatch.generate(_merge(cfg, options))


def fit(data, cfg=None, **options):
    """Profiles `data`; keyword options override `cfg`."""
    return _gradmatch.fit(data, _merge(cfg, options))


def _merge(cfg, options):
    base = {} if cfg is None else {k: getattr(cfg, k) for k in dir(cfg) if not k.startswith("_")}
    return config(**{**base, **options})
