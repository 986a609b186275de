from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from config.settings import TOOL_VERSION
from utils.trace_io import read_json, write_json


class RunManifest(BaseModel):
    """Everything needed to re-run a command: its arguments, inputs and artifacts."""
    command: str
    argv: List[str]
    config_path: Optional[str] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    tool_version: str = TOOL_VERSION
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def add_output(self, path: Path) -> None:
        self.outputs.append(str(path))

    def write(self, output_dir: Path) -> Path:
        path = Path(output_dir) / f"manifest_{self.command}.json"
        self.outputs.append(str(path))
        write_json(path, self.model_dump(mode="json"))
        return path

    @classmethod
    def read(cls, path: Path) -> "RunManifest":
        return cls(**read_json(path))
