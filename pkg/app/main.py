from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from slowapi import Limiter
from slowapi.errors import RateLimitExceeded
from slowapi.middleware import SlowAPIMiddleware
from slowapi.util import get_remote_address

from app import config
from app.api.routes import router as api_router
from app.exceptions import InputError, UndefinedRegionError

limiter = Limiter(key_func=get_remote_address, default_limits=config.RATE_LIMITS)

app = FastAPI(title="Frame Interpolation Lab API")

app.state.limiter = limiter

app.add_middleware(
    CORSMiddleware,
    allow_origins=config.ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.add_middleware(SlowAPIMiddleware)


@app.exception_handler(RateLimitExceeded)
async def rate_limit_exceeded_handler(request: Request, exc: RateLimitExceeded):
    return JSONResponse(
        status_code=429,
        content={"detail": "Rate limit exceeded. Please try again later."},
    )


@app.exception_handler(InputError)
async def input_error_handler(request: Request, exc: InputError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(UndefinedRegionError)
async def undefined_region_handler(request: Request, exc: UndefinedRegionError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


app.include_router(api_router)

if __name__ == "__main__":
    import uvicorn
    config.setup_logging()
    uvicorn.run(app, host="0.0.0.0", port=8000)
