from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator


class NetworkConfig(BaseModel):
    """Shape of the fully-connected scorer.

    The hidden layer defaults to half the input layer (rounded down, at least one unit).
    """

    model_config = ConfigDict(frozen=True)

    input_dim: int = Field(ge=1)
    hidden_dim: int = Field(ge=1)
    dropout_rate: float = Field(default=0.5, ge=0.0, lt=1.0)
    use_batchnorm: bool = True

    @model_validator(mode="before")
    @classmethod
    def _default_hidden_dim(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("hidden_dim") is None:
            input_dim = data.get("input_dim")
            if isinstance(input_dim, int):
                data = {**data, "hidden_dim": max(1, input_dim // 2)}
        return data
