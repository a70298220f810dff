"""
config
~~~~~~

Settings for a deformation run, from a JSON file or command-line flags.

Keys:

- "mode": "fast" or "slow" (default "slow")
- "lambda": target stretch of a slow run
- "theta": angle of extension in radians (2D only), or
- "rotation": an explicit orthogonal frame, as a list of rows
- "matrix": the deformation of a fast run, as a list of rows
- "delta": contraction threshold
- "firmness": a number, or `{"constant": K}`, `{"linear": kappa}`,
  `{"table": {degree: K, ...}, "default": K}`
- "p0", "p1", "p01": loop redistribution (default 1/4, 1/4, 1/2)
- "scan_step", "bisect_tol": event location in `t`
- "max_moves": cap on local moves
"""

import json as _json

from . import deform as _deform
from . import mechanics as _mechanics
from . import moves as _moves

KEYS = ("mode", "lambda", "theta", "rotation", "matrix", "delta", "firmness", "p0", "p1", "p01",
        "scan_step", "bisect_tol", "max_moves")

_DEFAULTS = {"mode": "slow", "p0": 0.25, "p1": 0.25, "p01": 0.5, "scan_step": 1e-3, "bisect_tol": 1e-10}


class RunConfig():
    """Validated run settings.  Unknown keys are rejected.

    :param values: Dictionary with keys among :data:`KEYS`.
    """
    def __init__(self, values):
        unknown = set(values) - set(KEYS)
        if unknown:
            raise ValueError("Unknown configuration keys {}".format(sorted(unknown)))
        self._values = dict(_DEFAULTS)
        self._values.update({k: v for k, v in values.items() if v is not None})
        mode = self._values["mode"]
        if mode not in ("fast", "slow"):
            raise ValueError("Mode must be 'fast' or 'slow', not '{}'".format(mode))
        for key in ("delta", "firmness"):
            if key not in self._values:
                raise ValueError("Configuration needs '{}'".format(key))
        if mode == "slow":
            if "lambda" not in self._values:
                raise ValueError("A slow run needs 'lambda'")
            if "matrix" in self._values:
                raise ValueError("'matrix' is for fast runs only")
            if "theta" in self._values and "rotation" in self._values:
                raise ValueError("Give at most one of 'theta' and 'rotation'")
        else:
            if "matrix" not in self._values:
                raise ValueError("A fast run needs 'matrix'")
            for key in ("lambda", "theta", "rotation"):
                if key in self._values:
                    raise ValueError("'{}' is for slow runs only".format(key))
        # Validates the remaining values
        self.schedule()

    @staticmethod
    def from_dict(values):
        return RunConfig(values)

    @staticmethod
    def from_file(file):
        """Read a JSON object from a filename or file-like object."""
        if isinstance(file, str):
            with open(file, encoding="utf-8") as f:
                values = _json.load(f)
        else:
            values = _json.load(file)
        if not isinstance(values, dict):
            raise ValueError("Configuration must be a JSON object")
        return RunConfig(values)

    @staticmethod
    def from_args(args, base=None):
        """Merge command-line flags over `base` (a dictionary, e.g. from a
        config file).  Flags left as `None` are ignored.

        :param args: An `argparse.Namespace` with some of the attributes
          `mode, stretch, theta, matrix, delta, K, kappa, firmness, p0, p1,
          p01, scan_step, bisect_tol, max_moves`.
        """
        values = dict(base) if base is not None else {}
        names = {"mode": "mode", "stretch": "lambda", "theta": "theta", "delta": "delta",
                 "p0": "p0", "p1": "p1", "p01": "p01", "scan_step": "scan_step",
                 "bisect_tol": "bisect_tol", "max_moves": "max_moves"}
        for attribute, key in names.items():
            value = getattr(args, attribute, None)
            if value is not None:
                values[key] = value
        matrix = getattr(args, "matrix", None)
        if matrix is not None:
            values["matrix"] = _json.loads(matrix) if isinstance(matrix, str) else matrix
        firmness = [(key, getattr(args, attribute, None)) for attribute, key in
                    (("K", "constant"), ("kappa", "linear"), ("firmness", None))]
        firmness = [(k, v) for k, v in firmness if v is not None]
        if len(firmness) > 1:
            raise ValueError("Give at most one of --K, --kappa and --firmness")
        if firmness:
            key, value = firmness[0]
            values["firmness"] = _json.loads(value) if key is None else {key: value}
        if values.get("mode") == "fast":
            values.pop("theta", None)
        return RunConfig(values)

    def __getitem__(self, key):
        return self._values[key]

    def get(self, key, default=None):
        return self._values.get(key, default)

    @property
    def mode(self):
        return self._values["mode"]

    def move_params(self):
        """:return: :class:`moves.MoveParams`."""
        v = self._values
        return _moves.MoveParams(v["delta"], _moves.firmness_from_spec(v["firmness"]), v["p0"], v["p1"], v["p01"])

    def rotation(self):
        """The extension frame, or `None` for the identity."""
        if "theta" in self._values:
            return _mechanics.rotation_2d(float(self._values["theta"]))
        return self._values.get("rotation")

    def schedule(self):
        """:return: :class:`deform.Schedule`."""
        v = self._values
        options = {"max_moves": v.get("max_moves"), "scan_step": v["scan_step"], "bisect_tol": v["bisect_tol"]}
        if v["mode"] == "fast":
            return _deform.Schedule.fast(v["matrix"], self.move_params(), **options)
        return _deform.Schedule.slow(v["lambda"], self.move_params(), self.rotation(), **options)

    def to_dict(self):
        return dict(self._values)

    def __repr__(self):
        return "RunConfig({})".format(self._values)
