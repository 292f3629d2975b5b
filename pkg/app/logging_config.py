"""
로깅 설정
"""
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from app.config import Settings, settings as default_settings

_configured = False

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(cfg: Optional[Settings] = None, log_file: Optional[str] = None) -> None:
    """
    루트 로거 설정 (한 번만 적용)

    Args:
        cfg: 설정 인스턴스 (미지정시 전역 설정)
        log_file: 로그 파일 경로 덮어쓰기 (빈 문자열이면 파일 로깅 생략)
    """
    global _configured
    if _configured:
        return

    cfg = cfg or default_settings
    root = logging.getLogger()
    root.setLevel(cfg.log_level.upper())
    formatter = logging.Formatter(LOG_FORMAT)

    console = logging.StreamHandler()
    console.setFormatter(formatter)
    root.addHandler(console)

    path = cfg.log_file if log_file is None else log_file
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            path,
            maxBytes=cfg.log_max_bytes,
            backupCount=cfg.log_backup_count,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    _configured = True
