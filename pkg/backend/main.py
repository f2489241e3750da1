from fastapi import FastAPI
from pydantic import BaseModel, ConfigDict
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import logging
import os
import uvicorn
from dotenv import load_dotenv

from backend.config import FIELD_NAMES, ScenarioConfig, build_config
from backend.errors import ConfigurationError, UrllcError
from backend.runner import run_allocate

# =====================================================
# CARGA DE VARIABLES DE ENTORNO (.env global)
# =====================================================
load_dotenv()

logger = logging.getLogger(__name__)

app = FastAPI(default_response_class=JSONResponse)

# =====================================================
# CORS CONFIGURABLE DESDE .env
# =====================================================
def parse_allowed_origins() -> list[str]:
    raw = os.getenv("ALLOWED_ORIGINS", "http://localhost:3000")
    parts = [p.strip() for p in raw.replace(" ", ",").split(",")]
    return [p for p in parts if p]


ALLOWED_ORIGINS = parse_allowed_origins()

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_credentials=False,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Límite de trials por request; los barridos largos van por el CLI
MAX_API_TRIALS = int(os.getenv("MAX_API_TRIALS", "200000"))


class AllocateRequest(BaseModel):
    """Campos parciales de ScenarioConfig; lo que falte toma el default."""

    model_config = ConfigDict(extra="allow")

    seed: int | None = None


def _error_contract(*, error: str, detail: str, status_code: int) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"error": error, "detail": detail})


def _request_config(body: AllocateRequest) -> ScenarioConfig:
    values = {k: v for k, v in (body.model_extra or {}).items() if v is not None}
    unknown = sorted(set(values) - set(FIELD_NAMES))
    if unknown:
        raise ConfigurationError(f"Campos desconocidos: {', '.join(unknown)}")
    if body.seed is not None:
        values["seed"] = body.seed

    config = build_config(values)
    if config.trials > MAX_API_TRIALS:
        raise ConfigurationError(f"trials={config.trials} excede el máximo de la API ({MAX_API_TRIALS})")
    return config


# =====================================================
# ENDPOINTS
# =====================================================
@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/allocate")
def allocate_endpoint(body: AllocateRequest):
    try:
        config = _request_config(body)
        row = run_allocate(config)
        data = row.model_dump()
        data.pop("wall_time", None)
        return data

    except ConfigurationError as e:
        return _error_contract(error=type(e).__name__, detail=str(e), status_code=422)

    except UrllcError as e:
        logger.warning("⚠️ Error del dominio en /allocate | %s: %s", type(e).__name__, e)
        return _error_contract(error=type(e).__name__, detail=str(e), status_code=400)

    except Exception as e:
        # ✅ Nunca devuelvas plain-text 500; responde JSON con contrato estable
        logger.exception("❌ Error inesperado en /allocate")
        return _error_contract(error=type(e).__name__, detail=str(e), status_code=500)


@app.get("/")
def root():
    defaults = ScenarioConfig()
    return {
        "mensaje": "API de precoding URLLC con cotas EVT activa 🚀",
        "defaults": defaults.model_dump(),
        "noise_power_w": defaults.noise_power,
        "max_trials": MAX_API_TRIALS,
        "allowed_origins": ALLOWED_ORIGINS,
    }


# =====================================================
# ENTRYPOINT
# =====================================================
if __name__ == "__main__":
    port = int(os.environ.get("PORT", 8000))
    uvicorn.run("backend.main:app", host="0.0.0.0", port=port, reload=True)
