"""
샌드위치 보 안정화 실험실 - 설정 모듈
"""
from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """애플리케이션 설정"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # 앱 설정
    app_env: str = "development"
    debug: bool = False

    # 출력 설정
    output_dir: str = "./output"
    default_seed: int = 20240601

    # 조밀 행렬 계산 한도 (자유도 수 기준)
    dense_limit: int = 4000

    # 이득 가정 검사 허용 오차 (상대)
    assumption_rtol: float = 1e-12

    # 스펙트럼 설정
    conj_pair_tol: float = 1e-8
    newton_tol: float = 1e-12
    newton_max_iters: int = 50
    crossover_n0: int = 5
    contour_initial_samples: int = 64
    contour_max_refine: int = 16

    # 시간 적분 설정
    auto_dt_coarse_elems: int = 8

    # 파라미터 스윕 설정
    sweep_concurrency: int = 4

    # 로깅 설정
    log_level: str = "INFO"
    log_file: str = "./logs/lab.log"
    log_max_size: int = 10
    log_backup_count: int = 5

    @property
    def log_max_bytes(self) -> int:
        """로그 파일 최대 크기 (바이트)"""
        return self.log_max_size * 1024 * 1024

    @property
    def is_development(self) -> bool:
        """개발 환경 여부"""
        return self.app_env == "development"


@lru_cache()
def get_settings() -> Settings:
    """설정 싱글톤 인스턴스 반환"""
    return Settings()


# 전역 설정 인스턴스
settings = get_settings()
