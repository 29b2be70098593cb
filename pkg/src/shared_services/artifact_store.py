# src/shared_services/artifact_store.py
import logging
import os
from pathlib import Path
from typing import Union

import pandas as pd

from config import settings

logger = logging.getLogger("edge_fabric.artifacts")


class ArtifactStore:
    """
    Writes run artifacts (CSV series, plan text, placements) into one output directory.

    Every file is written with "\n" line endings so artifacts compare byte for byte.
    """

    def __init__(self, out_dir: Union[str, Path, None] = None):
        self.out_dir = Path(out_dir or settings.OUTPUT_DIR)
        os.makedirs(self.out_dir, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        with open(target, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info(f"Saved {name} to {target}")
        return target

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        target = self.path(name)
        frame.to_csv(target, index=False, lineterminator="\n")
        logger.info(f"Saved {name} ({len(frame)} rows) to {target}")
        return target
