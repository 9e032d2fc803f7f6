import hashlib
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

from .config import Paths
from .models import SelectionReport


PathLike = Union[str, Path]


def cache_key(spec_bytes: bytes, catalogue_files: Iterable[Tuple[str, bytes]], model_size: int,
              domain_size: int) -> str:
    """Digest of everything a selection depends on; catalogue files are hashed in name order"""
    digest = hashlib.sha256()

    def field(label: str, data: bytes) -> None:
        # length-prefixed so adjacent fields cannot run into each other
        digest.update(label.encode("utf-8"))
        digest.update(len(data).to_bytes(8, "big"))
        digest.update(data)

    field("spec", spec_bytes)
    for name, data in sorted(catalogue_files):
        field("file", name.encode("utf-8"))
        field("data", data)
    field("k", str(model_size).encode("ascii"))
    field("m", str(domain_size).encode("ascii"))
    return digest.hexdigest()


def catalogue_files(paths: Iterable[PathLike]) -> List[Tuple[str, bytes]]:
    """(name, bytes) for every catalogue file under the given directories"""
    files = []
    for directory in paths:
        root = Path(directory)
        for path in sorted(root.glob(f"*{Paths.CATALOGUE_SUFFIX}")):
            files.append((f"{root.name}/{path.name}", path.read_bytes()))
    return files


def write_atomic(path: PathLike, text: str) -> None:
    """Write to a temporary file in the same directory, then rename over the target"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ReportCache:
    """Selection reports stored by cache key"""

    def __init__(self, cache_dir: PathLike = Paths.CACHE_DIR):
        self.cache_dir = Path(cache_dir)

    def path_for(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def get(self, key: str) -> Optional[SelectionReport]:
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            return SelectionReport.model_validate_json(path.read_text(encoding="utf-8"))
        except ValueError:
            # unreadable entries are treated as misses and overwritten later
            return None

    def put(self, key: str, report: SelectionReport) -> Path:
        path = self.path_for(key)
        write_atomic(path, report.model_dump_json(indent=2))
        return path
