from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field
from typing import List, Optional

from app.core.exceptions import DmdpError
from app.core.logging_config import setup_logging
from app.dmdp.generators import gen_two_out_random, gen_uniform_random, gen_worst_case
from app.dmdp.graph import parse_edge_list, serialize
from app.dmdp.scalar import as_decimal, field_for_mode
from app.solvers.baselines import bf_positive_cycle
from app.solvers.registry import cross_check, solve

# Set up logging
logger = setup_logging(__name__)

# Create router
router = APIRouter(prefix="/api", tags=["dmdp-solver"])

# Request models
class SolveRequest(BaseModel):
    graph: str = Field(..., description="Instance in edge-list text format")
    algorithm: str = Field(default="history", description="Solver name (vi, history, augmented, pi-classic, ...)")
    mode: Optional[str] = Field(default=None, description="Arithmetic mode (exact, float)")
    max_iters: Optional[int] = Field(default=None, description="Iteration cap for iterative solvers")
    cross_check: bool = Field(default=False, description="Run every solver and require agreement")

class VerifyRequest(BaseModel):
    graph: str = Field(..., description="Instance in edge-list text format")
    mu: str = Field(..., description="Candidate mean, decimal or a/b")
    mode: Optional[str] = Field(default=None, description="Arithmetic mode (exact, float)")

class GenerateRequest(BaseModel):
    model: str = Field(..., description="Generator (two-out, uniform, worst-case)")
    n: Optional[int] = Field(default=None, description="Vertex count (two-out, uniform)")
    m: Optional[int] = Field(default=None, description="Edge count (uniform)")
    k: Optional[int] = Field(default=None, description="Family parameter (worst-case)")
    seed: int = Field(default=0, description="Random seed")
    mode: Optional[str] = Field(default=None, description="Arithmetic mode (exact, float)")

# Response models
class SolveResponse(BaseModel):
    algorithm: str
    mu_star: str
    mu_star_decimal: str
    witness: Optional[List[int]] = None
    iterations: Optional[int] = None
    wall_time_ms: float
    agreeing_solvers: Optional[List[str]] = None

class VerifyResponse(BaseModel):
    mu: str
    positive_cycle: bool
    message: str

class GenerateResponse(BaseModel):
    n: int
    m: int
    graph: str

@router.post("/solve", response_model=SolveResponse)
async def solve_endpoint(request: SolveRequest):
    """
    Compute the optimal mean of an instance with the named solver.
    """
    try:
        field = field_for_mode(request.mode)
        graph, values = parse_edge_list(request.graph, field)
        init = values if any(v != field.zero for v in values) else None
        result = solve(graph, request.algorithm, init, request.max_iters)

        agreeing = None
        if request.cross_check:
            agreeing = [r.algorithm for r in cross_check(graph, result)]

        return SolveResponse(
            algorithm=result.algorithm,
            mu_star=field.format(result.mean),
            mu_star_decimal=as_decimal(result.mean),
            witness=list(result.cycle.vertices) if result.cycle is not None else None,
            iterations=result.iterations,
            wall_time_ms=result.wall_time_ns / 1e6,
            agreeing_solvers=agreeing,
        )

    except DmdpError as e:
        logger.warning(f"Solve request rejected: {e}")
        raise HTTPException(status_code=400, detail=str(e))

@router.post("/verify", response_model=VerifyResponse)
async def verify_endpoint(request: VerifyRequest):
    """
    Check whether some cycle beats a candidate mean (Bellman-Ford).
    """
    try:
        field = field_for_mode(request.mode)
        graph, _ = parse_edge_list(request.graph, field)
        mu = field.convert(request.mu)
        positive = bf_positive_cycle(graph, mu)
        message = (
            "positive cycle exists: candidate below optimum" if positive
            else "no positive cycle: candidate is at least the optimum"
        )
        return VerifyResponse(mu=field.format(mu), positive_cycle=positive, message=message)

    except DmdpError as e:
        logger.warning(f"Verify request rejected: {e}")
        raise HTTPException(status_code=400, detail=str(e))

@router.post("/generate", response_model=GenerateResponse)
async def generate_endpoint(request: GenerateRequest):
    """
    Generate an instance and return it in edge-list text format.
    """
    try:
        field = field_for_mode(request.mode)
        values = None
        if request.model == "worst-case":
            if request.k is None:
                raise DmdpError("worst-case generation needs k")
            graph, values = gen_worst_case(request.k, field)
        elif request.model == "two-out":
            if request.n is None:
                raise DmdpError("two-out generation needs n")
            graph = gen_two_out_random(request.n, request.seed, field)
        elif request.model == "uniform":
            if request.n is None or request.m is None:
                raise DmdpError("uniform generation needs n and m")
            graph = gen_uniform_random(request.n, request.m, request.seed, field)
        else:
            raise DmdpError(f"Unknown model '{request.model}' (expected two-out, uniform or worst-case)")

        return GenerateResponse(n=graph.n, m=graph.m, graph=serialize(graph, values))

    except DmdpError as e:
        logger.warning(f"Generate request rejected: {e}")
        raise HTTPException(status_code=400, detail=str(e))
