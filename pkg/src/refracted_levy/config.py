"""Model specification files.

JSON schema::

    {
      "sigma": <nonnegative real>,
      "gamma": <real>,            # or "drift": <real> for sigma = 0 models
      "jumps": "none" | [{"lambda": <real>, "rho": <real>}, ...],
      "delta": <positive real>,
      "b": <real>
    }

Two presets ship with the package and can be named instead of a path:
``std-bm`` (sigma = sqrt(2) Brownian motion) and ``cl-exp`` (drift 2 with
unit-rate exponential downward jumps), both with delta = 0.5, b = 0.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ModelValidationError
from .model import LevyModel, RefractionParams, validate

PRESETS = ("std-bm", "cl-exp")


def load_model_file(source) -> tuple[LevyModel, RefractionParams]:
    """Load a model/parameter pair from a path, preset name, or dict."""
    if isinstance(source, dict):
        return parse_model_spec(source, where="<dict>")
    name = str(source)
    if name in PRESETS:
        text = (
            resources.files("refracted_levy") / "presets" / f"{name}.json"
        ).read_text()
    else:
        path = Path(name)
        if not path.exists():
            raise ModelValidationError(f"model file not found: {name}")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{name}: invalid JSON at line {exc.lineno}: {exc.msg}")
    return parse_model_spec(data, where=name)


def parse_model_spec(data: dict, where: str = "<config>"):
    if not isinstance(data, dict):
        raise ModelValidationError(f"{where}: top level must be an object")

    def fail(field, message):
        raise ModelValidationError(f"{where}: field '{field}': {message}")

    def real(field, default=None):
        if field not in data:
            if default is not None:
                return default
            fail(field, "missing")
        value = data[field]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            fail(field, f"expected a number, got {value!r}")
        return float(value)

    known = {"sigma", "gamma", "drift", "jumps", "delta", "b"}
    for key in data:
        if key not in known:
            fail(key, "unknown field")

    sigma = real("sigma")
    if sigma < 0:
        fail("sigma", "must be nonnegative")

    raw_jumps = data.get("jumps", "none")
    if raw_jumps == "none":
        terms = []
    elif isinstance(raw_jumps, list):
        terms = []
        for i, item in enumerate(raw_jumps):
            if not isinstance(item, dict) or set(item) != {"lambda", "rho"}:
                fail("jumps", f"entry {i} must be an object with 'lambda' and 'rho'")
            lam, rho = float(item["lambda"]), float(item["rho"])
            if lam <= 0 or rho <= 0:
                fail("jumps", f"entry {i}: lambda and rho must be positive")
            terms.append((lam, rho))
    else:
        fail("jumps", "must be \"none\" or a list of {lambda, rho} objects")

    if "drift" in data:
        if "gamma" in data:
            fail("drift", "specify either 'gamma' or 'drift', not both")
        if sigma != 0.0:
            fail("drift", "drift form requires sigma = 0")
        model = LevyModel.with_drift(real("drift"), terms)
    else:
        model = LevyModel.hyperexponential(sigma, real("gamma"), terms)

    params = RefractionParams(delta=real("delta"), b=real("b"))
    validate(model, params).raise_if_invalid()
    return model, params
