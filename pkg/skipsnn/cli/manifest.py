"""
Run manifests: every output directory records what produced it.
"""
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

from skipsnn import __version__
from skipsnn.config.schemas import ExperimentConfig, config_hash, config_to_dict
from skipsnn.logs.logger import logger

MANIFEST_NAME = "manifest.json"


def build_manifest(
    command: str,
    config: Optional[ExperimentConfig],
    seeds: Iterable[int],
    outputs: Iterable[Union[str, Path]] = (),
    extra: Optional[Dict[str, Any]] = None,
    fallback_hash: Optional[str] = None,
) -> Dict[str, Any]:
    """Without a config, `fallback_hash` (e.g. from checkpoint metadata) stands in for its hash"""
    return {
        "command": command,
        "config_hash": config_hash(config) if config is not None else fallback_hash,
        "config": config_to_dict(config) if config is not None else None,
        "seeds": list(seeds),
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(Path(p).name for p in outputs),
        **(extra or {}),
    }


def write_manifest(out_dir: Union[str, Path], manifest: Dict[str, Any]) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug(f"Manifest written to {path}")
    return path
