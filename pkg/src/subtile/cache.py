"""On-disk cache of supertile expansions.

Files live at ``<dir>/<hash>.patch`` where the hash covers the system file
bytes, the prototile id and the level.  Each file is a header line followed by
one tile per line in expansion order, so a cache hit returns exactly the tuple
a fresh expansion would.
"""

from __future__ import annotations

import hashlib
import logging
import os
from pathlib import Path

from .field import FieldElement
from .system import Tile, TilingSystem

log = logging.getLogger(__name__)

MAGIC = "subtile-patch 1"


def entry_key(sys: TilingSystem, p: int, n: int) -> str:
    h = hashlib.sha256()
    h.update(sys.source)
    h.update(f"\0{p}\0{n}".encode())
    return h.hexdigest()


class ExpansionCache:
    def __init__(self, directory: str | os.PathLike, min_level: int = 4):
        self.dir = Path(directory)
        # small supertiles are cheaper to rebuild than to parse
        self.min_level = min_level
        self.hits = 0
        self.misses = 0

    def path(self, sys: TilingSystem, p: int, n: int) -> Path:
        return self.dir / f"{entry_key(sys, p, n)}.patch"

    def load(self, sys: TilingSystem, p: int, n: int):
        if n < self.min_level:
            return None
        path = self.path(sys, p, n)
        try:
            lines = path.read_text(encoding="ascii").splitlines()
        except OSError:
            self.misses += 1
            return None
        header = f"{MAGIC} {sys.hash} {p} {n}"
        if not lines or lines[0] != header:
            log.warning("ignoring stale cache entry %s", path)
            self.misses += 1
            return None
        F = sys.field
        tiles = []
        try:
            for line in lines[1:]:
                parts = [int(v) for v in line.split()]
                q, den, num = parts[0], parts[1], tuple(parts[2:])
                if len(num) != F.degree:
                    raise ValueError(line)
                tiles.append(Tile(q, FieldElement(F, num, den)))
        except ValueError:
            log.warning("corrupt cache entry %s", path)
            self.misses += 1
            return None
        self.hits += 1
        return tuple(tiles)

    def store(self, sys: TilingSystem, p: int, n: int, tiles) -> None:
        if n < self.min_level:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.path(sys, p, n)
        body = [f"{MAGIC} {sys.hash} {p} {n}"]
        for t in tiles:
            body.append(" ".join(str(v) for v in (t.proto, t.x.den, *t.x.num)))
        tmp = path.with_suffix(".tmp")
        tmp.write_text("\n".join(body) + "\n", encoding="ascii")
        os.replace(tmp, path)


def attach_cache(sys: TilingSystem, directory) -> ExpansionCache | None:
    if directory is None:
        sys.cache = None
        return None
    sys.cache = ExpansionCache(directory)
    return sys.cache
