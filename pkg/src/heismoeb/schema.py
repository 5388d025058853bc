"""JSON Schema for the reports written by ``heismoeb verify`` and ``heismoeb classify``."""

VERDICT = {"enum": ["pass", "fail", "inconclusive"]}

CONDITION_REPORT = {
    "type": "object",
    "required": ["condition", "verdict", "model", "field", "n", "samples", "seed",
                 "constants", "witness", "notes"],
    "properties": {
        "condition": {"type": "string"},
        "verdict": VERDICT,
        "model": {"type": "string"},
        "field": {"enum": ["R", "C", "H", "O"]},
        "n": {"type": "integer", "minimum": 2},
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "constants": {"type": "object"},
        "witness": {"type": ["object", "null"]},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
    "if": {"properties": {"verdict": {"const": "fail"}}},
    "then": {"properties": {"witness": {"type": "object"}}},
}

MATRIX = {
    "type": "object",
    "required": ["rows", "columns", "cells", "fits", "violations", "unresolved", "not_metric",
                 "seed", "samples"],
    "properties": {
        "rows": {"type": "array", "items": {"type": "string"}},
        "columns": {"type": "array", "items": {"type": "string"}},
        "cells": {"type": "array", "items": CONDITION_REPORT},
        "fits": {"type": "object"},
        "violations": {"type": "array"},
        "unresolved": {"type": "array"},
        "not_metric": {"type": "object"},
        "seed": {"type": "integer"},
        "samples": {"type": "integer"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "heismoeb report",
    "type": "object",
    "required": ["config", "suites", "version"],
    "properties": {
        "config": {
            "type": "object",
            "required": ["field", "n", "seed"],
            "properties": {
                "field": {"enum": ["R", "C", "H", "O"]},
                "n": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "samples": {"type": ["integer", "null"], "minimum": 1},
                "tol": {"type": ["number", "null"]},
            },
        },
        "suites": {"type": "array", "items": CONDITION_REPORT},
        "matrix": MATRIX,
        "version": {"type": "string"},
    },
}
