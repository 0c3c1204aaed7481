from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    运行时配置（与算法参数无关）

    通过环境变量 TGWV_* 或 .env 文件覆盖
    """

    model_config = SettingsConfigDict(
        env_prefix="TGWV_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = True

    # DetectorConfig.workers 未给出时的默认线程数
    DEFAULT_WORKERS: int = Field(default=1, ge=1)

    MASK_PREFIX: str = "frame_"
    INDEX_DIGITS: int = 6


settings = Settings()
