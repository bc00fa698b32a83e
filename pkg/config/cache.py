import redis
import json
import logging
import hashlib
from typing import Any, Optional, Dict
from config.config import Config, FORMAT_VERSION

logger = logging.getLogger(__name__)

NAMESPACE = "localization"
RESULT_KINDS = ("nonres", "measure")


class CacheManager:
    """
    Redis store for reports that are pure functions of their request:
    non-resonance scans and Monte-Carlo measure estimates. Every method
    degrades to a miss when Redis is unreachable.
    """

    def __init__(self, connect: bool = True):
        self.config = Config()
        self.redis_client = None
        self.cache_stats = {'hits': 0, 'misses': 0, 'sets': 0, 'errors': 0}
        if connect:
            self._connect()

    def _connect(self):
        try:
            client = redis.Redis(
                host=self.config.REDIS_HOST,
                port=self.config.REDIS_PORT,
                db=self.config.REDIS_DB,
                password=self.config.REDIS_PASSWORD,
                decode_responses=True,
                socket_connect_timeout=2,
                socket_timeout=2
            )
            client.ping()
            self.redis_client = client
            logger.info(f"Result cache on redis://{self.config.REDIS_HOST}:{self.config.REDIS_PORT}/{self.config.REDIS_DB}")
        except Exception as e:
            logger.warning(f"Redis unavailable, results will not be cached: {e}")
            self.redis_client = None

    def result_key(self, kind: str, request: Dict[str, Any]) -> str:
        """<namespace>:<kind>:<format>:<sha256 of the request as canonical JSON>"""
        if kind not in RESULT_KINDS:
            raise ValueError(f"Unknown result kind {kind}, expected one of {RESULT_KINDS}")
        digest = hashlib.sha256(json.dumps(request, sort_keys=True).encode()).hexdigest()
        return f"{NAMESPACE}:{kind}:{FORMAT_VERSION}:{digest}"

    def get(self, key: str) -> Optional[Any]:
        if not self.redis_client:
            return None
        try:
            value = self.redis_client.get(key)
        except Exception as e:
            logger.error(f"Cache read of {key} failed: {e}")
            self.cache_stats['errors'] += 1
            return None
        if value is None:
            self.cache_stats['misses'] += 1
            return None
        self.cache_stats['hits'] += 1
        return json.loads(value)

    def set(self, key: str, value: Any, ttl: Optional[int] = None) -> bool:
        if not self.redis_client:
            return False
        try:
            stored = self.redis_client.setex(key, ttl or self.config.CACHE_TTL, json.dumps(value))
        except Exception as e:
            logger.error(f"Cache write of {key} failed: {e}")
            self.cache_stats['errors'] += 1
            return False
        if stored:
            self.cache_stats['sets'] += 1
        return bool(stored)

    def delete_pattern(self, pattern: str) -> int:
        if not self.redis_client:
            return 0
        try:
            keys = list(self.redis_client.scan_iter(match=pattern))
            return self.redis_client.delete(*keys) if keys else 0
        except Exception as e:
            logger.error(f"Cache delete of {pattern} failed: {e}")
            self.cache_stats['errors'] += 1
            return 0

    def get_nonres_report(self, request: Dict[str, Any]) -> Optional[dict]:
        return self.get(self.result_key("nonres", request))

    def set_nonres_report(self, request: Dict[str, Any], report: dict) -> bool:
        return self.set(self.result_key("nonres", request), report)

    def get_measure_result(self, request: Dict[str, Any]) -> Optional[dict]:
        return self.get(self.result_key("measure", request))

    def set_measure_result(self, request: Dict[str, Any], result: dict) -> bool:
        return self.set(self.result_key("measure", request), result)

    def invalidate_results(self) -> int:
        """Drop cached reports of every format version; other keys in the database stay"""
        deleted = sum(self.delete_pattern(f"{NAMESPACE}:{kind}:*") for kind in RESULT_KINDS)
        logger.info(f"Invalidated {deleted} cached results")
        return deleted

    def get_stats(self) -> Dict[str, Any]:
        stats = dict(self.cache_stats)
        lookups = stats['hits'] + stats['misses']
        stats['hit_rate'] = stats['hits'] / lookups if lookups else 0
        if self.redis_client:
            try:
                stats['redis_memory_used'] = self.redis_client.info().get('used_memory_human', 'N/A')
            except Exception as e:
                logger.error(f"Redis info unavailable: {e}")
        return stats

    def is_available(self) -> bool:
        if not self.redis_client:
            return False
        try:
            return bool(self.redis_client.ping())
        except Exception:
            return False


_cache_manager = None


def get_cache_manager() -> CacheManager:
    global _cache_manager
    if _cache_manager is None:
        _cache_manager = CacheManager()
    return _cache_manager
