"""Run configuration and report writers for the command line."""

import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from entanglement.space import BipartiteSpace, harmonic_space, space_from_levels
from shared.config import settings
from shared.constants import OutputFormat
from shared.errors import InvalidArgumentError, StateFileError
from shared.logger import get_logger

logger = get_logger(__name__)

REPORT_VERSION = "1.0"


class RunConfig(BaseModel):
    """Parameters shared by every subcommand.

    Values come from the defaults below, then the JSON file named by
    ``ENTCUT_CONFIG``, then command-line flags.
    """
    model_config = ConfigDict(extra="forbid")

    cutoff: Tuple[int, int] = (24, 24)
    levels_a: Optional[List[float]] = None
    levels_b: Optional[List[float]] = None
    beta: float = Field(default=1.0, gt=0)
    budget: float = Field(default=3.0, gt=0)
    eps: float = Field(default=0.2, gt=0)
    tol: float = Field(default=1e-3, gt=0)
    npt_tol: float = Field(default=1e-12, gt=0)
    seed: int = Field(default=0, ge=0)
    restarts: int = Field(default=4, ge=0)
    max_iter: int = Field(default=300, gt=0)
    sweeps: int = Field(default=20, ge=0)
    format: OutputFormat = OutputFormat.CSV
    out: Optional[Path] = None
    metadata: bool = True

    @field_validator("cutoff")
    @classmethod
    def _cutoff_at_least_two(cls, cutoff: Tuple[int, int]) -> Tuple[int, int]:
        if min(cutoff) < 2:
            raise ValueError("cutoff dimensions must be at least 2")
        return cutoff

    def space(self) -> BipartiteSpace:
        """Harmonic ladder at ``cutoff`` unless explicit spectra are configured."""
        if self.levels_a is not None or self.levels_b is not None:
            return space_from_levels(
                self.levels_a if self.levels_a is not None else range(self.cutoff[0]),
                self.levels_b if self.levels_b is not None else range(self.cutoff[1]),
            )
        return harmonic_space(*self.cutoff)


def load_run_config(overrides: Optional[Dict[str, Any]] = None, path: Optional[str] = None) -> RunConfig:
    """Defaults <- JSON config file <- non-None ``overrides``.

    Raises:
        StateFileError: If the config file cannot be read or parsed
        InvalidArgumentError: If the merged values fail validation
    """
    values: Dict[str, Any] = {}
    path = path if path is not None else settings.ENTCUT_CONFIG
    if path:
        try:
            values.update(json.loads(Path(path).read_text()))
        except OSError as e:
            raise StateFileError(f"Cannot read run configuration: {e.strerror}", {"path": path})
        except json.JSONDecodeError as e:
            raise StateFileError("Run configuration is not valid JSON", {"path": path, "detail": str(e)})
        logger.debug(f"Run configuration loaded from {path}")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise InvalidArgumentError("Invalid run configuration", {"errors": e.errors(include_url=False)})


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Header row plus one line per row; floats by repr, None as an empty cell."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def render_json(report: Any, config: RunConfig, command: str) -> str:
    """Report document; everything run-dependent sits under ``metadata``."""
    document: Dict[str, Any] = {"command": command, "report": report}
    if config.metadata:
        document["metadata"] = {
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "version": REPORT_VERSION,
            "config": config.model_dump(mode="json"),
        }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def strip_metadata(text: str) -> Dict[str, Any]:
    """Parsed JSON report without its metadata, for comparing runs."""
    document = json.loads(text)
    document.pop("metadata", None)
    return document


def render_table(
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    config: RunConfig,
    command: str,
) -> str:
    """CSV text, or a JSON report of one object per row."""
    if config.format is OutputFormat.JSON:
        return render_json([dict(zip(columns, row)) for row in rows], config, command)
    return render_csv(columns, rows)


def emit(text: str, out: Optional[Path], stream: Optional[io.TextIOBase] = None) -> None:
    """Write once to ``out`` or to the given stream."""
    if out is None:
        (stream or sys.stdout).write(text)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    except OSError as e:
        raise StateFileError(f"Cannot write report: {e.strerror}", {"path": str(out)})
    logger.info(f"Report written to {out}")
