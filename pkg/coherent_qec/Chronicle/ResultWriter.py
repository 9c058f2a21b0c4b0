# coherent_qec/Chronicle/ResultWriter.py

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union

import pandas as pd

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _atomic_write(path: Path, text: str) -> None:
    """Writes through a temp file in the target directory, then renames over `path`."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


class ResultWriter:
    """
    Emits one command's rows or report with provenance: every CSV row and every
    JSON report carries the config hash and the seed.
    """

    def __init__(self, out: PathLike, config_hash: str, seed: int):
        self.out = Path(out)
        self.config_hash = config_hash
        self.seed = seed

    def frame(self, rows: Iterable[Mapping[str, Any]], columns: Optional[List[str]] = None) -> pd.DataFrame:
        frame = pd.DataFrame(list(rows), columns=columns)
        frame["seed"] = self.seed
        frame["config_hash"] = self.config_hash
        return frame

    def write_csv(self, rows: Iterable[Mapping[str, Any]], columns: Optional[List[str]] = None,
                  path: Optional[PathLike] = None) -> Path:
        target = Path(path) if path is not None else self.out
        frame = self.frame(rows, columns)
        _atomic_write(target, frame.to_csv(index=False, float_format="%.10g", lineterminator="\n"))
        log.info(f"Wrote {len(frame)} rows to '{target}'.")
        return target

    def write_json(self, report: Dict[str, Any], path: Optional[PathLike] = None) -> Path:
        target = Path(path) if path is not None else self.out
        payload = dict(report, seed=self.seed, config_hash=self.config_hash)
        _atomic_write(target, json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n")
        log.info(f"Wrote report to '{target}'.")
        return target

    def write_text(self, text: str, path: PathLike) -> Path:
        target = Path(path)
        _atomic_write(target, text)
        log.info(f"Wrote '{target}'.")
        return target


def read_sweep(path: PathLike) -> pd.DataFrame:
    """Reads a pl-sweep CSV back for fitting."""
    return pd.read_csv(path)
