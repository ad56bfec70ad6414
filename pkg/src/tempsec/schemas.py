"""JSON schemas for experiment configs and emitted artifacts."""

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}

GENERATOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["generator", "n", "gamma", "capacity"],
    "properties": {
        "generator": {"enum": ["uniform-values", "geometric-values", "planted-heavy",
                               "packing-random"]},
        "n": _POS_INT,
        "gamma": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "capacity": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "durations": {"enum": ["fixed", "uniform"]},
        "rho": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "heavy_count": {"type": "integer", "minimum": 0},
        "heavy_value": {"type": "number", "minimum": 0},
        "rows": _POS_INT,
        "sparsity": _POS_INT,
        "coef_low": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
}

FILE_SOURCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["file"],
    "properties": {"file": {"type": "string", "minLength": 1}},
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["instance", "algorithm", "trials", "seed"],
    "properties": {
        "instance": {
            "type": "object",
            "if": {"required": ["file"]},
            "then": FILE_SOURCE_SCHEMA,
            "else": GENERATOR_SCHEMA,
        },
        "algorithm": {
            "type": "object",
            "additionalProperties": False,
            "required": ["variant"],
            "properties": {
                "variant": {"enum": ["cardinality", "packing", "lengths"]},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "epsilon": {"type": ["number", "null"], "minimum": 0, "maximum": 0.5},
            },
        },
        "arrivals": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["uniform", "general"]},
                "inverse_cdf": {
                    "type": "array",
                    "minItems": 2,
                    "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                },
            },
        },
        "trials": _POS_INT,
        "seed": {"type": "integer", "minimum": 0},
        "oracle": {"enum": ["opt_star", "flow", "brute", "lp"]},
        "validate": {"type": "boolean"},
        "diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"N": _POS_INT},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string", "minLength": 1}},
        },
    },
}

_NULLABLE_NUM = {"type": ["number", "null"]}

_BOUND = {
    "type": "object",
    "additionalProperties": False,
    "required": ["theorem", "value", "flags", "error_term"],
    "properties": {
        "theorem": {"type": "string"},
        "value": _NUM,
        "flags": {"type": "array", "items": {"type": "string"}},
        "error_term": _NULLABLE_NUM,
    },
}

SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["ratio", "ci_low", "ci_high", "bound", "bound_flags", "bounds", "mean_alg",
                 "mean_opt", "stderr_alg", "stderr_opt", "mean_of_ratios", "trials", "seed",
                 "variant", "oracle", "gamma", "n", "B", "d", "epsilon", "alpha",
                 "invariant_violations"],
    "properties": {
        "ratio": _NULLABLE_NUM,
        "ci_low": _NULLABLE_NUM,
        "ci_high": _NULLABLE_NUM,
        "bound": _NULLABLE_NUM,
        "bound_flags": {"type": "array", "items": {"type": "string"}},
        "bounds": {"type": "object", "additionalProperties": _BOUND},
        "mean_alg": _NUM,
        "mean_opt": _NUM,
        "stderr_alg": _NUM,
        "stderr_opt": _NUM,
        "mean_of_ratios": _NULLABLE_NUM,
        "trials": _POS_INT,
        "seed": {"type": "integer"},
        "variant": {"enum": ["cardinality", "packing", "lengths"]},
        "oracle": {"type": "string"},
        "gamma": _NUM,
        "n": {"type": "integer", "minimum": 0},
        "B": _NUM,
        "d": {"type": "integer", "minimum": 1},
        "epsilon": _NULLABLE_NUM,
        "alpha": _NULLABLE_NUM,
        "invariant_violations": {"type": "object", "additionalProperties": {"type": "integer"}},
    },
}

DIAGNOSTIC_SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["diagnostic", "seed"],
    "properties": {
        "diagnostic": {"enum": ["block", "walk", "violation"]},
        "seed": {"type": "integer"},
    },
}

REPRO_SCHEMA = {
    "type": "object",
    "required": ["check", "seed", "case"],
    "properties": {
        "check": {"enum": ["flow_vs_brute", "lp_vs_vertices"]},
        "seed": {"type": "integer"},
        "case": {"type": "integer"},
    },
}
