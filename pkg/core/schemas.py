from pathlib import Path
from typing import Annotated, Any, Dict, Literal, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.logger import logger
from config.settings import settings
from .exceptions import ConfigValidationError


NoiseSigma = Union[Literal["auto"], Annotated[float, Field(ge=0.0)]]

ModelT = TypeVar("ModelT", bound=BaseModel)


class DetectorConfig(BaseModel):
    """前景检测器的全部可调参数"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    levels: int = Field(
        default=7, ge=1,
        description="小波分解层数 M"
    )

    ar_coefficient: float = Field(
        default=0.95, gt=0.0, lt=1.0,
        description="一阶自回归系数 α，用于平移权重"
    )

    decision_k: float = Field(
        default=2.5, gt=0.0,
        description="高斯判决倍数 k"
    )

    vote_fraction: float = Field(
        default=0.5, gt=0.0, le=1.0,
        description="投票阈值占最大可得票数的比例 τ"
    )

    lbp_window_radius: int = Field(
        default=8, ge=1,
        description="LBP 直方图窗口半径"
    )

    noise_sigma: NoiseSigma = Field(
        default="auto",
        description="噪声标准差，'auto' 表示由 HH_1 频带估计"
    )

    learning_rate: float = Field(
        default=0.005, gt=0.0, le=1.0,
        description="背景模型与判决统计的学习率"
    )

    max_gaussians: int = Field(
        default=5, ge=1,
        description="每像素最多高斯分量数"
    )

    postprocess_median: bool = Field(
        default=False,
        description="是否对最终掩码做一次 3x3 中值滤波"
    )

    burnin_frames: int = Field(
        default=30, ge=0,
        description="预热帧数，期间全部输出背景"
    )

    variance_floor: float = Field(default=1e-4, gt=0.0)

    variance_ceiling: float = Field(default=0.25, gt=0.0)

    decision_variance_floor: float = Field(default=1e-6, gt=0.0)

    static_frames: int = Field(
        default=30, ge=1,
        description="静态中值背景使用的帧数"
    )

    workers: int = Field(
        default_factory=lambda: settings.DEFAULT_WORKERS, ge=1,
        description="帧内按频带并行的线程数，未给出时取 TGWV_DEFAULT_WORKERS（默认 1）"
    )

    @model_validator(mode="after")
    def check_variance_bounds(self) -> "DetectorConfig":
        if self.variance_floor >= self.variance_ceiling:
            raise ValueError(
                f"variance_floor ({self.variance_floor}) 必须小于 variance_ceiling ({self.variance_ceiling})"
            )
        return self


class SynthScenario(BaseModel):
    """合成伪装场景描述"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    width: int = Field(default=192, ge=8)
    height: int = Field(default=192, ge=8)
    frames: int = Field(default=200, ge=1)

    background: Literal["constant", "grating", "noise_texture"] = "grating"
    background_level: float = Field(default=0.5, ge=0.0, le=1.0)
    background_amplitude: float = Field(default=0.02, ge=0.0, le=0.5)
    background_period: float = Field(default=8.0, gt=0.0)
    background_orientation: float = Field(
        default=0.0,
        description="条纹方向（度），0 表示沿 x 方向变化的竖条纹"
    )

    object_shape: Literal["none", "rectangle", "ellipse"] = "rectangle"
    object_width: int = Field(default=48, ge=1)
    object_height: int = Field(default=48, ge=1)
    object_texture: Literal["constant", "grating", "noise_texture"] = "grating"
    object_amplitude: float = Field(default=0.02, ge=0.0, le=0.5)
    object_period: float = Field(default=8.0, gt=0.0)
    object_orientation: float = 90.0
    object_x: int = Field(default=16, description="进入时左上角 x")
    object_y: int = Field(default=72, description="进入时左上角 y")
    object_velocity_x: float = 0.5
    object_velocity_y: float = 0.0
    object_enter_frame: int = Field(default=60, ge=0)

    texture_tile: int = Field(default=16, ge=2)
    noise_sigma: float = Field(default=0.01, ge=0.0)
    seed: int = 0


def read_key_value_file(path: Union[str, Path]) -> Dict[str, str]:
    """
    读取 key = value 文本文件

    Args:
        path: 文件路径

    Returns:
        键值字典（值均为去除首尾空白的字符串）
    """
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError("无法读取配置文件", f"{file_path}: {e}") from e

    values: Dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigValidationError("配置行缺少 '='", f"{file_path}:{line_no}: {raw.strip()}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigValidationError("配置行缺少键名", f"{file_path}:{line_no}")
        if key in values:
            raise ConfigValidationError("配置项重复", f"{file_path}:{line_no}: {key}")
        values[key] = value
    return values


def build_model(model_cls: Type[ModelT], values: Dict[str, Any], source: str = "") -> ModelT:
    """用键值字典构建 pydantic 模型，并把验证错误转换为 ConfigValidationError"""
    try:
        return model_cls(**values)
    except ValidationError as e:
        problems = []
        for err in e.errors():
            key = ".".join(str(part) for part in err["loc"]) or "<model>"
            problems.append(f"{key}: {err['msg']}")
        raise ConfigValidationError(f"{model_cls.__name__} 验证失败 {source}".strip(), "; ".join(problems)) from e


def load_config(path: Union[str, Path]) -> DetectorConfig:
    """
    加载检测器配置文件

    未出现的键取默认值，未知键报错。

    Args:
        path: 配置文件路径

    Returns:
        DetectorConfig 对象
    """
    values = read_key_value_file(path)
    config = build_model(DetectorConfig, values, str(path))
    logger.info(f"已加载配置 {path}: levels={config.levels}, α={config.ar_coefficient}, τ={config.vote_fraction}")
    return config


def load_scenario(path: Union[str, Path]) -> SynthScenario:
    """加载合成场景文件（与检测器配置相同的 key = value 格式）"""
    return build_model(SynthScenario, read_key_value_file(path), str(path))
