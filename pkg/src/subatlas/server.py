"""Read-only HTTP API over an exported artifact tree.

Every response carries the artifact-tree content hash (X-Artifact-Hash and
ETag) computed once at startup; the tree is treated as immutable while
serving. Endpoints only read files, never write.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .cluster import ALGORITHMS
from .metrics import jaccard
from .pipeline import artifact_hash, month_dir

__all__ = ["create_app", "serve"]


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status, detail={"code": code, "message": message})


def _load_json(path: Path, code: str, message: str) -> dict:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise _error(404, code, message) from None


def create_app(artifact_root: str | Path) -> FastAPI:
    root = Path(artifact_root)
    if not root.is_dir():
        raise FileNotFoundError(f"artifact root {root} does not exist")
    tree_hash = artifact_hash(root)
    app = FastAPI(title="subatlas", docs_url=None, redoc_url=None)

    def months_on_disk() -> list[str]:
        base = root / "months"
        if not base.is_dir():
            return []
        return sorted(
            d.name
            for d in base.iterdir()
            if d.is_dir() and (d / "model" / "model.json").exists()
        )

    def require_month(month: str) -> None:
        if month not in months_on_disk():
            raise _error(404, "unknown_month", f"no artifacts for month {month!r}")

    def require_algo(algo: str) -> None:
        if algo not in ALGORITHMS:
            raise _error(
                400,
                "bad_request",
                f"unknown algorithm {algo!r}; expected one of {list(ALGORITHMS)}",
            )

    def neighbors_doc(month: str) -> dict:
        return _load_json(
            month_dir(root, month) / "neighbors_top20.json",
            "artifact_missing",
            f"neighbors artifact missing for {month}",
        )

    @app.middleware("http")
    async def stamp_hash(request: Request, call_next):
        if request.headers.get("if-none-match") == f'"{tree_hash}"':
            return Response(status_code=304, headers=_hash_headers())
        response = await call_next(request)
        for name, value in _hash_headers().items():
            response.headers[name] = value
        return response

    def _hash_headers() -> dict:
        return {"X-Artifact-Hash": tree_hash, "ETag": f'"{tree_hash}"'}

    @app.exception_handler(RequestValidationError)
    async def remap_validation(request: Request, exc: RequestValidationError):
        errors = [
            {"loc": list(map(str, e.get("loc", []))), "msg": str(e.get("msg", ""))}
            for e in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content={"detail": {"code": "bad_request", "errors": errors}},
            headers=_hash_headers(),
        )

    @app.get("/api/months")
    def get_months() -> list[str]:
        return months_on_disk()

    @app.get("/api/months/{month}/clusters")
    def get_clusters(month: str, algo: str, k: int = Query(ge=1)) -> dict:
        require_month(month)
        require_algo(algo)
        return _load_json(
            month_dir(root, month) / "clusters" / f"{algo}-k{k}.json",
            "unknown_clustering",
            f"no {algo} k={k} clustering for {month}",
        )

    @app.get("/api/months/{month}/layout")
    def get_layout(month: str) -> dict:
        require_month(month)
        return _load_json(
            month_dir(root, month) / "layout2d.json",
            "artifact_missing",
            f"layout artifact missing for {month}",
        )

    @app.get("/api/months/{month}/subreddits/{name}/neighbors")
    def get_neighbors(month: str, name: str, n: int = Query(10, ge=1)) -> dict:
        require_month(month)
        doc = neighbors_doc(month)
        if name not in doc["neighbors"]:
            raise _error(
                404, "unknown_subreddit", f"{name!r} not in the {month} snapshot"
            )
        eff = min(n, doc["n"])
        return {
            "month": month,
            "subreddit": name,
            "n": eff,
            "neighbors": doc["neighbors"][name][:eff],
        }

    @app.get("/api/subreddits/{name}/timeline")
    def get_timeline(name: str, n: int = Query(10, ge=1)) -> dict:
        months = months_on_disk()
        if not months:
            raise _error(404, "unknown_month", "no months in the artifact tree")
        cells: dict[str, list | None] = {}
        eff = n
        for month in months:
            doc = neighbors_doc(month)
            eff = min(eff, doc["n"])
            entry = doc["neighbors"].get(name)
            cells[month] = entry if entry is not None else None
        if all(v is None for v in cells.values()):
            raise _error(
                404, "unknown_subreddit", f"{name!r} unknown in every month"
            )
        for month, entry in cells.items():
            if entry is not None:
                cells[month] = entry[:eff]
        adjacent = []
        for prev, curr in zip(months, months[1:]):
            value = None
            if cells[prev] is not None and cells[curr] is not None:
                value = jaccard(
                    [e["subreddit"] for e in cells[prev]],
                    [e["subreddit"] for e in cells[curr]],
                )
            adjacent.append({"months": [prev, curr], "jaccard": value})
        return {
            "subreddit": name,
            "n": eff,
            "months": months,
            "neighbors": cells,
            "adjacent_jaccard": adjacent,
        }

    @app.get("/api/stability/summary")
    def get_stability() -> dict:
        return _load_json(
            root / "cross" / "stability.json",
            "artifact_missing",
            "stability artifact not built",
        )

    @app.get("/api/vi")
    def get_vi(algo: str, k: int = Query(ge=1)) -> dict:
        require_algo(algo)
        return _load_json(
            root / "cross" / "vi" / f"{algo}-k{k}.json",
            "unknown_clustering",
            f"no VI matrix for {algo} k={k}",
        )

    @app.get("/api/metrics")
    def get_metrics(algo: str, k: int = Query(ge=1)) -> dict:
        require_algo(algo)
        per_month = {}
        for month in months_on_disk():
            path = month_dir(root, month) / "metrics" / f"{algo}-k{k}.json"
            if path.exists():
                per_month[month] = json.loads(path.read_text())
        if not per_month:
            raise _error(
                404, "unknown_clustering", f"no metrics for {algo} k={k} in any month"
            )
        return {"algorithm": algo, "k": k, "months": per_month}

    return app


def serve(artifact_root: str | Path, port: int = 8000, host: str = "127.0.0.1"):
    """Blocking: run the API over the given artifact tree."""
    import uvicorn

    uvicorn.run(create_app(artifact_root), host=host, port=port, log_level="info")
