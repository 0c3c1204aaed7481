"""
TGWV 前景检测统一异常类
"""


class TgwvError(Exception):
    """前景检测基础异常类"""

    def __init__(self, message: str, details: str = ""):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def __str__(self):
        if self.details:
            return f"{self.message}: {self.details}"
        return self.message

    def to_dict(self) -> dict:
        """转换为字典格式"""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "details": self.details
        }


class DimensionError(TgwvError):
    """尺寸不匹配或尺寸过小异常"""
    pass


class ConfigValidationError(TgwvError):
    """配置/场景文件验证错误异常"""
    pass


class FrameLoadError(TgwvError):
    """帧文件加载错误异常"""
    pass


class FrameSaveError(TgwvError):
    """帧文件保存错误异常"""
    pass


class ScenarioError(TgwvError):
    """合成场景无法生成异常"""
    pass


class CheckpointError(TgwvError):
    """背景模型检查点错误异常"""
    pass


class EmptyInputError(TgwvError):
    """空输入异常"""
    pass


class FrameValueError(TgwvError, ValueError):
    """帧数据取值无效异常（非有限值或超出 [0,1]）"""
    pass
