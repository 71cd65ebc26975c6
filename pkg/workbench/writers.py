# workbench/writers.py
"""
Result persistence: fixed-schema CSV (or JSON) tables, SVG figures and a
manifest listing every written file with its sha256.
"""

import csv
import hashlib
import json
import os
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

from config.settings import settings
from core.logs import setup_logger

FORMATS = ('csv', 'json')


def format_cell(value: Any, float_format: str) -> str:
    """Locale-independent text for one CSV cell"""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, float_format)
    try:
        return format(float(value), float_format)
    except (TypeError, ValueError):
        return str(value)


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


class ResultWriter:
    """Writes task tables into one output directory and remembers what it wrote"""

    def __init__(self, output_dir: str, fmt: str = 'csv', float_format: Optional[str] = None):
        if fmt not in FORMATS:
            raise ValueError(f"Unknown output format {fmt!r}")
        self.output_dir = output_dir
        self.format = fmt
        self.float_format = float_format or settings.get('workbench.float_format', '.17e')
        self.logger = setup_logger('Workbench', self.__class__.__name__)
        self.written: List[Dict[str, Any]] = []
        os.makedirs(output_dir, exist_ok=True)

    def _record(self, path: str, kind: str, columns: Optional[Sequence[str]] = None):
        self.written.append({
            'file': os.path.relpath(path, self.output_dir),
            'kind': kind,
            'columns': list(columns) if columns is not None else None,
            'sha256': file_sha256(path),
        })
        self.logger.info(f"Wrote {path}")

    def write_table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        if self.format == 'json':
            path = os.path.join(self.output_dir, f"{name}.json")
            records = [dict(zip(columns, (format_cell(v, self.float_format) for v in row))) for row in rows]
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                json.dump({'columns': list(columns), 'rows': records}, f, indent=2)
                f.write('\n')
        else:
            path = os.path.join(self.output_dir, f"{name}.csv")
            with open(path, 'w', encoding='utf-8', newline='') as f:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(columns)
                for row in rows:
                    writer.writerow([format_cell(v, self.float_format) for v in row])
        self._record(path, self.format, columns)
        return path

    def write_text(self, name: str, text: str, kind: str) -> str:
        path = os.path.join(self.output_dir, name)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        self._record(path, kind)
        return path

    def write_manifest(self, config_echo: str, version: str, tasks: List[Dict[str, Any]]) -> str:
        """manifest.json is not listed in itself"""
        path = os.path.join(self.output_dir, 'manifest.json')
        manifest = {
            'version': version,
            'written_at': datetime.now().isoformat(),
            'config': config_echo,
            'tasks': tasks,
            'files': self.written,
        }
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(manifest, f, indent=2)
            f.write('\n')
        self.logger.info(f"Manifest written to {path}")
        return path
