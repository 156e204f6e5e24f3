"""JSON schemas for the files the CLI writes."""

import jsonschema

_NUM = {"type": "number"}
_OPT_NUM = {"type": ["number", "null"]}

MODEL = {
    "type": "object",
    "required": ["n", "edges"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "edges": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [{"type": "integer"}, {"type": "integer"}, {"type": "number", "minimum": -1, "maximum": 1}],
                "minItems": 3,
                "maxItems": 3,
            },
        },
    },
}

LEARN_REPORT = {
    "type": "object",
    "required": ["eps", "constant_C_observed", "runtime_ms"],
    "properties": {
        "eps": _NUM,
        "loctv2_vs_truth": _OPT_NUM,
        "constant_C_observed": _OPT_NUM,
        "runtime_ms": _NUM,
        "n": {"type": "integer"},
    },
}

PARTITION = {
    "type": "object",
    "required": ["threshold", "blocks", "weak_edges"],
    "properties": {
        "threshold": _NUM,
        "blocks": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "weak_edges": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
    },
}

FAILURE_REPORT = {
    "type": "object",
    "required": [
        "kind",
        "delta",
        "n",
        "eps",
        "chow_liu_loctv2",
        "chow_liu_certificate",
        "chow_liu_structural_bound",
        "chow_liu_plus_plus_loctv2",
    ],
    "properties": {"kind": {"const": "failure"}},
}

LATENT_REPORT = {
    "type": "object",
    "required": ["kind", "delta", "eps", "independent_tree_loctv2", "chow_liu_plus_plus_loctv2", "model"],
    "properties": {"kind": {"const": "latent"}},
}

STRUCTURE_REPORT = {
    "type": "object",
    "required": ["kind", "n", "m", "eps", "trials", "recovery_rate", "loctv3_threshold", "per_trial"],
    "properties": {
        "kind": {"const": "structure"},
        "recovery_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "loctv3_max": _OPT_NUM,
    },
}

SCALING_REPORT = {
    "type": "object",
    "required": ["kind", "n", "trials", "rows", "observed_C_max", "monotone_in_eps"],
    "properties": {
        "kind": {"const": "scaling"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["eps", "max_error", "observed_C"],
            },
        },
    },
}

EXPERIMENT_REPORTS = {
    "failure": FAILURE_REPORT,
    "latent": LATENT_REPORT,
    "structure": STRUCTURE_REPORT,
    "scaling": SCALING_REPORT,
}

# columns of scaling.csv, in order
SCALING_CSV_COLUMNS = ("eps", "observed_C")


def validate(instance, schema):
    jsonschema.validate(instance, schema, cls=jsonschema.Draft202012Validator)
