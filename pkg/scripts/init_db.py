"""Create the certificate cache schema."""

import argparse
import sys
from pathlib import Path

from sqlalchemy.engine import make_url
from sqlalchemy.exc import SQLAlchemyError

from csp_refuter.config import RefuterConfig
from csp_refuter.services.cache_service import Base, CacheService

DEFAULT_URL = "sqlite:///./data/csp_refuter_cache.db"


def sqlite_path(db_url: str) -> Path | None:
    """File behind a SQLite URL, or None for other backends and in-memory databases."""
    url = make_url(db_url)
    if url.get_backend_name() != "sqlite" or not url.database or url.database == ":memory:":
        return None
    return Path(url.database)


def main():
    parser = argparse.ArgumentParser(description="Create the certificate cache tables")
    parser.add_argument("--url", default=None, help="Cache URL (default: REFUTER_CACHE_URL, else a local SQLite file)")
    args = parser.parse_args()

    db_url = args.url or RefuterConfig().cache_url or DEFAULT_URL
    path = sqlite_path(db_url)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)

    try:
        CacheService(db_url)
    except SQLAlchemyError as e:
        print(f"Could not initialize {db_url}: {e}", file=sys.stderr)
        sys.exit(1)

    print(f"Cache tables ready at {db_url}: {', '.join(sorted(Base.metadata.tables))}")
    if path is not None:
        print(f"SQLite file: {path.resolve()}")
    if not args.url and not RefuterConfig().cache_url:
        print(f"Set REFUTER_CACHE_URL={db_url} to enable caching.")


if __name__ == "__main__":
    main()
