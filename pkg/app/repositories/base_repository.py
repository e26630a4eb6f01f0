"""
Base Repository
Provides common file operations for all repositories: atomic writes and JSON records
"""
import json
import os
import tempfile
from typing import Any, Dict, List, Optional

from app.exceptions import DataError
from app.utils.helpers import to_jsonable


class BaseRepository:
    """Base repository rooted at a directory"""

    def __init__(self, root: Optional[str] = None):
        self.root = root or os.getcwd()

    def path(self, *parts: str) -> str:
        """Resolve a path below the root (absolute paths are kept)"""
        return os.path.join(self.root, *parts)

    def exists(self, *parts: str) -> bool:
        return os.path.exists(self.path(*parts))

    def ensure_dir(self, *parts: str) -> str:
        directory = self.path(*parts)
        os.makedirs(directory, exist_ok=True)
        return directory

    def write_bytes(self, path: str, data: bytes) -> str:
        """Write to a temporary file in the target directory, then rename over the target"""
        path = self.path(path)
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix='.tmp-', dir=directory)
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        return path

    def write_text(self, path: str, text: str) -> str:
        return self.write_bytes(path, text.encode('utf-8'))

    def read_bytes(self, path: str) -> bytes:
        path = self.path(path)
        try:
            with open(path, 'rb') as f:
                return f.read()
        except FileNotFoundError:
            raise DataError(f'File not found: {path}') from None
        except IsADirectoryError:
            raise DataError(f'Expected a file, got a directory: {path}') from None

    def read_text(self, path: str) -> str:
        try:
            return self.read_bytes(path).decode('utf-8')
        except UnicodeDecodeError:
            raise DataError(f'File is not UTF-8 text: {self.path(path)}') from None

    def write_json(self, path: str, record: Any) -> str:
        return self.write_text(path, json.dumps(to_jsonable(record), indent=2, sort_keys=True) + '\n')

    def read_json(self, path: str) -> Dict:
        text = self.read_text(path)
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f'Corrupt JSON in {self.path(path)}: {e}') from None

    def list_dirs(self, *parts: str) -> List[str]:
        directory = self.path(*parts)
        if not os.path.isdir(directory):
            return []
        return sorted(d for d in os.listdir(directory) if os.path.isdir(os.path.join(directory, d)))
