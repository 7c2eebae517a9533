from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import uvicorn
from dotenv import load_dotenv

from app.api.routes import router as solver_router
from app.core.exceptions import DmdpError
from app.core.logging_config import setup_logging
from app.core.settings import settings

# Load environment variables
load_dotenv()

# Set up logging
logger = setup_logging(__name__)

# Initialize FastAPI app
app = FastAPI(
    title=settings.APP_NAME,
    description="API for solving deterministic MDPs (maximum mean cycle) with value-iteration based solvers",
    version=settings.VERSION,
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(solver_router)

# Root endpoint
@app.get("/")
async def root():
    return {
        "message": f"Welcome to the {settings.APP_NAME}",
        "docs": "/docs",
        "endpoints": {
            "solve": "/api/solve",
            "verify": "/api/verify",
            "generate": "/api/generate"
        }
    }

# Error handling
@app.exception_handler(DmdpError)
async def dmdp_exception_handler(request: Request, exc: DmdpError):
    return JSONResponse(
        status_code=400,
        content={"detail": str(exc)},
    )

@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled error on {request.url.path}: {exc}")
    return JSONResponse(
        status_code=500,
        content={"detail": f"An unexpected error occurred: {str(exc)}"},
    )

if __name__ == "__main__":
    # Run the API server
    uvicorn.run(
        "main:app",
        host=settings.API_HOST,
        port=settings.API_PORT,
        reload=False
    )
