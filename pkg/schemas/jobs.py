from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from schemas.config import ExperimentFile


class ExperimentRequest(BaseModel):
    mode: Literal["single", "sweep", "budget"] = "single"
    experiment: ExperimentFile = Field(default_factory=ExperimentFile)
    label: Optional[str] = None

    @model_validator(mode="after")
    def check_sweep(self):
        if self.mode == "sweep" and self.experiment.sweep is None:
            raise ValueError("mode 'sweep' needs experiment.sweep")
        return self


class JobAccepted(BaseModel):
    status: str = "accepted"
    job_id: str
    mode: str


class JobResult(BaseModel):
    job_id: str
    status: str
    data: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    message: Optional[str] = None
