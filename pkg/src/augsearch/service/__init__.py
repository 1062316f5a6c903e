"""Service package: FastAPI app and request/response schemas."""
