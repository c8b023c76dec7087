"""
JSON Summary Renderer.
Writes the verdict summary of a run. Keys are sorted and numbers normalized,
so identical runs produce identical files.
"""
import json
import logging
import math
import os
from typing import Any, Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)


def _normalize(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': _normalize(float(value.real)), 'im': _normalize(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def check_entry(name: str, identity: str, value: Any, tolerance: Optional[float],
                passed: bool, **extra) -> Dict[str, Any]:
    """One summary line for a numerical check; identity names the relation being tested."""
    entry = {'name': name, 'identity': identity, 'value': value,
             'tolerance': tolerance, 'passed': bool(passed)}
    entry.update(extra)
    return entry


class SummaryRenderer:
    def __init__(self):
        self.failed: List[str] = []

    def render(self, summary: Dict[str, Any], output_path: str):
        """Generates the JSON summary; remembers the names of failed checks."""
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        payload = _normalize(summary)
        self.failed = [c['name'] for c in payload.get('checks', []) if not c.get('passed', True)]
        with open(output_path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write('\n')
        logger.info(f"Wrote summary to {output_path} ({len(self.failed)} failed checks)")
