"""Bundled benchmark models and their simulation horizons."""

from __future__ import annotations

from importlib import resources

HORIZONS = {
    "th": 0.5,
    "wlm": 30.0,
    "robot": 0.07,
    "afb": 1.6,
    "reactor": 30.0,
}

NAMES = tuple(HORIZONS)


def model_text(name: str) -> str:
    if name not in HORIZONS:
        raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(NAMES)}")
    return resources.files(__name__).joinpath(f"{name}.yaml").read_text()


def load_benchmark(name: str):
    from ..modelfile import loads_model

    return loads_model(model_text(name))
