"""
Lorenz Attractors - Map and sweep specification loader

Path: /map_spec_manager.py
Purpose: Reads map and sweep specifications from inline JSON, a file path or a named instance,
         validates them against JSON Schemas and keeps diagnostics that point at the offending
         line or field.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from jsonschema import Draft7Validator

from lorenz_config import get_tolerances
from lorenz_errors import InvalidMapSpec
from lorenz_map import NAMED_INSTANCES, PARAMETER_KEYS, StandardLorenzMap, validate
from sweep import SweepSpec

logger = logging.getLogger("map_spec_manager")

TOLERANCE_SCHEMA = {
    "type": "object",
    "properties": {
        "eps_point": {"type": "number", "exclusiveMinimum": 0},
        "eps_critical": {"type": "number", "exclusiveMinimum": 0},
        "eps_value": {"type": "number", "exclusiveMinimum": 0},
        "max_bisect": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

MAP_SCHEMA = {
    "type": "object",
    "required": list(PARAMETER_KEYS),
    "properties": {
        **{key: {"type": "number"} for key in PARAMETER_KEYS},
        "tolerances": TOLERANCE_SCHEMA,
    },
    "additionalProperties": False,
}

RANGE_SCHEMA = {
    "oneOf": [
        {"type": "number"},
        {
            "type": "object",
            "required": ["lo", "hi", "steps"],
            "properties": {
                "lo": {"type": "number"},
                "hi": {"type": "number"},
                "steps": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
    ]
}

CLASSIFIER_SCHEMA = {
    "type": "object",
    "properties": {
        key: {"type": "integer", "minimum": 1}
        for key in ("max_period", "max_depth", "solenoid_threshold", "grid", "horizon", "samples",
                    "transient", "length", "max_intervals", "trials", "rotation_n", "basin_grid",
                    "basin_iterations", "invariance_samples", "witnesses")
    },
    "additionalProperties": False,
}
CLASSIFIER_SCHEMA["properties"].update({
    "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "basin_radius": {"type": "number", "exclusiveMinimum": 0},
})

SWEEP_SCHEMA = {
    "type": "object",
    "required": ["parameters"],
    "properties": {
        "parameters": {
            "type": "object",
            "required": list(PARAMETER_KEYS),
            "properties": {key: RANGE_SCHEMA for key in PARAMETER_KEYS},
            "additionalProperties": False,
        },
        "tolerances": TOLERANCE_SCHEMA,
        "out": {"type": "string"},
        "workers": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "classifier": CLASSIFIER_SCHEMA,
    },
    "additionalProperties": False,
}


class MapSpecManager:
    """Loads map and sweep specifications with detailed diagnostics"""

    def __init__(self):
        self.spec: Optional[Dict[str, Any]] = None
        self.diagnostics = {
            "status": "unknown",
            "message": "No specification loaded",
            "details": [],
        }

    def _fail(self, status: str, message: str, details=None) -> None:
        self.diagnostics["status"] = status
        self.diagnostics["message"] = message
        self.diagnostics["details"] = list(details or [])
        logger.error(message)

    def read_source(self, source: str) -> Optional[Dict[str, Any]]:
        """
        Parse inline JSON text or the JSON file a path names

        Returns:
            The parsed object, or None with diagnostics describing the failure
        """
        self.spec = None
        self.diagnostics = {"status": "unknown", "message": "", "details": [], "source": source}
        text = source.strip()
        if not text.startswith("{"):
            file_path = Path(source)
            abs_path = file_path.absolute()
            self.diagnostics["absolute_path"] = str(abs_path)
            if not file_path.exists():
                self._fail("file_not_found", f"Specification file not found at {abs_path}")
                return None
            if file_path.stat().st_size == 0:
                self._fail("empty_file", f"Specification file exists but is empty: {abs_path}")
                return None
            logger.info(f"Loading specification from: {abs_path}")
            text = file_path.read_text()

        try:
            data = json.loads(text)
        except json.JSONDecodeError as json_err:
            self._fail("invalid_json",
                       f"Invalid JSON at line {json_err.lineno}, column {json_err.colno}: {json_err.msg}",
                       [{"line": json_err.lineno, "column": json_err.colno, "error": json_err.msg}])
            return None
        return data

    def check_schema(self, data: Any, schema: Dict[str, Any]) -> bool:
        errors = sorted(Draft7Validator(schema).iter_errors(data), key=lambda e: list(e.absolute_path))
        if not errors:
            return True
        details = [{"field": "/".join(str(p) for p in err.absolute_path) or "<root>", "error": err.message}
                   for err in errors]
        first = details[0]
        self._fail("schema_violation", f"Schema violation at {first['field']}: {first['error']}", details)
        return False

    def load_map(self, source: str) -> Optional[StandardLorenzMap]:
        """
        Load a map from a named instance (F, C, P, T), inline JSON or a JSON file

        Args:
            source: Instance name, JSON object text or file path

        Returns:
            The map, or None when the specification is rejected (see diagnostics)
        """
        if source.strip() in NAMED_INSTANCES:
            data: Any = dict(NAMED_INSTANCES[source.strip()])
            self.diagnostics = {"status": "unknown", "message": "", "details": [], "source": source}
        else:
            data = self.read_source(source)
            if data is None:
                return None
        if not self.check_schema(data, MAP_SCHEMA):
            return None

        report = validate(data)
        if not report.valid:
            self._fail("invalid_parameters", f"Invalid map parameters: {'; '.join(report.violations)}",
                       [{"field": v.split(" ")[0], "error": v} for v in report.violations])
            return None
        try:
            lorenz = StandardLorenzMap.from_dict(data)
        except (InvalidMapSpec, ValueError) as exc:
            self._fail("invalid_parameters", f"Invalid tolerances: {exc}", [{"field": "tolerances", "error": str(exc)}])
            return None

        self.spec = data
        self.diagnostics["status"] = "success"
        self.diagnostics["message"] = "Map specification loaded successfully"
        logger.info(f"Loaded map {lorenz.parameters()}")
        return lorenz

    def load_sweep(self, source: str) -> Optional[SweepSpec]:
        """Load a sweep specification; None with diagnostics when rejected"""
        data = self.read_source(source)
        if data is None or not self.check_schema(data, SWEEP_SCHEMA):
            return None
        tolerances = data.get("tolerances", {})
        try:
            get_tolerances(tolerances)
        except ValueError as exc:
            self._fail("invalid_parameters", f"Invalid tolerances: {exc}", [{"field": "tolerances", "error": str(exc)}])
            return None

        spec = SweepSpec.from_dict(data)
        self.spec = data
        self.diagnostics["status"] = "success"
        self.diagnostics["message"] = f"Sweep specification loaded: {spec.size} grid points"
        logger.info(self.diagnostics["message"])
        return spec

    def get_diagnostic_info(self) -> Dict[str, Any]:
        return self.diagnostics
