from typing import Any, Dict, Iterable, Iterator, List, Union
import json
import logging
from pathlib import Path

from pydantic import BaseModel, ValidationError

from app.core.exceptions import ConfigurationError
from app.schemas.model import ModelConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    """Yield one object per non-blank line; undecodable lines are logged and skipped"""
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                logger.warning(f"{path}:{number}: skipping undecodable line ({e})")


def write_jsonl(path: PathLike, rows: Iterable[Union[BaseModel, Dict[str, Any]]]) -> int:
    count = 0
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            if isinstance(row, BaseModel):
                handle.write(row.model_dump_json())
            else:
                handle.write(json.dumps(row, ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def parse_key_values(text: str) -> Dict[str, str]:
    """Parse `key=value` lines; `#` starts a comment, blank lines are ignored"""
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {number}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def load_model_config(path: PathLike) -> ModelConfig:
    values = parse_key_values(Path(path).read_text(encoding="utf-8"))
    unknown = sorted(set(values) - set(ModelConfig.model_fields))
    if unknown:
        raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")
    try:
        return ModelConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid config {path}: {e.errors()[0]['loc'][0]}: {e.errors()[0]['msg']}")


def format_table(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    """Fixed-width text table for terminal reports"""
    cells = [[str(c) for c in columns]] + [[_cell(row.get(c)) for c in columns] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.3f}"
    return "" if value is None else str(value)
