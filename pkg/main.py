import logging

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from core.logging_utils import setup_logging

# Initialize global logging to stdout for log streaming
setup_logging(level=logging.INFO)

from api.experiments import router as experiments_router
from api.results import router as results_router
from core.exceptions import ConfigError
from core.redis_client import redis_manager

SERVICE_NAME = "fusion-node-simulator"
VERSION = "1.0.0"

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Fusion Node Simulator",
    version=VERSION,
    description="Queued GST/SM node simulations, load sweeps and fronthaul budget tables",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(experiments_router, prefix="/api", tags=["Experiments"])
app.include_router(results_router, prefix="/api", tags=["Result"])


@app.exception_handler(ConfigError)
async def config_error_handler(request: Request, exc: ConfigError):
    logger.warning(f"Rejected {request.url.path}: {exc}")
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/health", tags=["System"])
async def health():
    return {
        "status": "ok",
        "service": SERVICE_NAME,
        "version": VERSION,
        "job_store": "redis" if redis_manager.use_redis else "memory",
    }
