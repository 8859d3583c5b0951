"""JSON schemas for the documents the command-line tool emits."""

SCHEMA_VERSION = "1.0"

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}

_check = {
    "type": "object",
    "required": ["name", "residual", "threshold", "passed"],
    "properties": {"name": {"type": "string"}, "residual": _num_or_null, "threshold": _num,
                   "passed": {"type": "boolean"}},
    "additionalProperties": False,
}

REPORT = {
    "type": "object",
    "required": ["model", "parameters", "checks", "overall", "skipped"],
    "properties": {
        "model": {"type": "string"},
        "parameters": {"type": "object"},
        "checks": {"type": "array", "items": _check},
        "overall": {"type": "boolean"},
        "skipped": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
}

PAYLOADS = {
    "spectrum": {
        "type": "object",
        "required": ["eigenvalues"],
        "properties": {
            "eigenvalues": {"type": "array", "items": _num},
            "oracle_eigenvalues": {"type": "array", "items": _num},
            "max_abs_deviation": _num,
        },
        "additionalProperties": False,
    },
    "eigvecs": {
        "type": "object",
        "required": ["vectors"],
        "properties": {"vectors": {"type": "array", "items": {
            "type": "object",
            "required": ["index", "eigenvalue", "components", "norm_sq", "residual"],
            "properties": {"index": {"type": "integer"}, "eigenvalue": _num,
                           "components": {"type": "array", "items": _num},
                           "norm_sq": _num, "residual": _num},
            "additionalProperties": False,
        }}},
        "additionalProperties": False,
    },
    "couplings": {
        "type": "object",
        "required": ["rows"],
        "properties": {"rows": {"type": "array", "items": {
            "type": "object",
            "required": ["n", "t_plus", "t_minus", "mu", "flag"],
            "properties": {"n": {"type": "integer"}, "t_plus": _num, "t_minus": _num,
                           "mu": {"type": "array", "items": _num_or_null, "minItems": 2, "maxItems": 2},
                           "flag": {"type": "string"}},
            "additionalProperties": False,
        }}},
        "additionalProperties": False,
    },
    "verify": {
        "oneOf": [
            REPORT,
            {
                "type": "object",
                "required": ["reports", "overall", "passed", "failed", "skipped"],
                "properties": {"reports": {"type": "array", "items": REPORT}, "overall": {"type": "boolean"},
                               "passed": {"type": "integer"}, "failed": {"type": "integer"},
                               "skipped": {"type": "integer"}},
                "additionalProperties": False,
            },
        ]
    },
}


def document_schema(command: str) -> dict:
    """Schema of the whole output document for ``command``."""
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["schema_version", "command", "parameters", "payload"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "command": {"const": command},
            "parameters": {"type": "object"},
            "payload": PAYLOADS[command],
        },
        "additionalProperties": False,
    }
