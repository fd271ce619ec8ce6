"""Cache Service - SQLAlchemy-backed store for deviation certificates and dual solutions."""

import hashlib
import json
from datetime import datetime
from typing import Any, Optional

from sqlalchemy import Column, DateTime, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

Base = declarative_base()


class DeviationCacheEntry(Base):
    """A deviation certificate keyed by (instance, relation, S, beta, ell, norm mode)."""
    __tablename__ = "deviation_cache"

    key = Column(String, primary_key=True)
    instance_digest = Column(String, index=True)
    relation = Column(Integer)
    certificate = Column(Text)  # JSON of DeviationCertificate.to_dict()
    created_at = Column(DateTime, default=datetime.utcnow)


class DualCacheEntry(Base):
    """A dominating polynomial keyed by (relation table, nu, t, basis)."""
    __tablename__ = "dual_cache"

    key = Column(String, primary_key=True)
    basis = Column(String)
    polynomial = Column(Text)
    created_at = Column(DateTime, default=datetime.utcnow)


def _digest(payload: Any) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode("utf-8")).hexdigest()


def deviation_key(
    instance_digest: str,
    relation: Optional[int],
    S: tuple,
    beta: Optional[tuple],
    ell: int,
    norm_mode: str,
    coefficients: Optional[dict] = None,
) -> str:
    coeffs = sorted((list(b), str(c)) for b, c in coefficients.items()) if coefficients else None
    return _digest([instance_digest, relation, list(S), list(beta) if beta else None, ell, norm_mode, coeffs])


def dual_key(membership: tuple, domain_size: int, nu: tuple, t: int, basis: str, exact: bool) -> str:
    table = "".join("1" if b else "0" for b in membership)
    return _digest([table, domain_size, [str(p) for p in nu], t, basis, exact])


class CacheService:
    """Service for the certificate cache."""

    def __init__(self, db_url: str):
        self.url = db_url
        self.engine = create_engine(db_url)
        Base.metadata.create_all(self.engine)
        self.Session = sessionmaker(bind=self.engine)

    def get_deviation(self, key: str) -> Optional[dict]:
        with self.Session() as session:
            entry = session.get(DeviationCacheEntry, key)
            if entry:
                return json.loads(entry.certificate)
        return None

    def put_deviation(self, key: str, instance_digest: str, relation: Optional[int], certificate: dict):
        payload = json.dumps(certificate)
        with self.Session() as session:
            entry = session.get(DeviationCacheEntry, key)
            if entry:
                entry.certificate = payload
                entry.created_at = datetime.utcnow()
            else:
                session.add(DeviationCacheEntry(
                    key=key,
                    instance_digest=instance_digest,
                    relation=relation,
                    certificate=payload,
                ))
            session.commit()

    def get_dual(self, key: str) -> Optional[dict]:
        with self.Session() as session:
            entry = session.get(DualCacheEntry, key)
            if entry:
                return json.loads(entry.polynomial)
        return None

    def put_dual(self, key: str, basis: str, polynomial: dict):
        payload = json.dumps(polynomial)
        with self.Session() as session:
            entry = session.get(DualCacheEntry, key)
            if entry:
                entry.polynomial = payload
                entry.created_at = datetime.utcnow()
            else:
                session.add(DualCacheEntry(key=key, basis=basis, polynomial=payload))
            session.commit()

    def clear(self, instance_digest: Optional[str] = None) -> int:
        """Delete deviation entries (of one instance, or all) and, without a digest, all duals."""
        with self.Session() as session:
            query = session.query(DeviationCacheEntry)
            if instance_digest is not None:
                query = query.filter(DeviationCacheEntry.instance_digest == instance_digest)
            removed = query.delete()
            if instance_digest is None:
                removed += session.query(DualCacheEntry).delete()
            session.commit()
        return removed


# Global cache instance
_cache_service: Optional[CacheService] = None


def init_cache_service(db_url: str) -> CacheService:
    global _cache_service
    _cache_service = CacheService(db_url)
    return _cache_service


def get_cache_service() -> Optional[CacheService]:
    return _cache_service
