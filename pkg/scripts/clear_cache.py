"""Drop cached deviation certificates and dual solutions."""

import argparse
import sys

from csp_refuter.config import RefuterConfig
from csp_refuter.services.cache_service import CacheService


def main():
    parser = argparse.ArgumentParser(description="Clear the certificate cache")
    parser.add_argument("--url", default=None, help="Cache URL (default: REFUTER_CACHE_URL)")
    parser.add_argument("--instance-digest", default=None,
                        help="Only drop deviation certificates of this instance")
    args = parser.parse_args()

    db_url = args.url or RefuterConfig().cache_url
    if not db_url:
        print("No cache configured; set REFUTER_CACHE_URL or pass --url.")
        sys.exit(1)

    removed = CacheService(db_url).clear(args.instance_digest)
    print(f"Cache cleared: {removed} entries removed from {db_url}")


if __name__ == "__main__":
    main()
