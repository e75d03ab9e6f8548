from pydantic_settings import BaseSettings
from typing import Dict, Any
import os


def _service_name_from_env() -> str:
    attributes = os.getenv("OTEL_RESOURCE_ATTRIBUTES", "")
    for item in attributes.split(","):
        if "=" in item:
            key, value = item.split("=", 1)
            if key.strip() == "service.name" and value.strip():
                return value.strip()
    return "qxot"


class Settings(BaseSettings):
    # Application settings
    APP_NAME: str = "qxot"
    APP_VERSION: str = "1.0.0"
    APP_DESCRIPTION: str = "Quantum XOR oblivious transfer simulator and leakage analyzer"

    # Reproducibility
    SEED: int | None = None
    OUTPUT_DIR: str = "runs"
    DEFAULT_JOBS: int = 1

    # Numerical tolerances
    NORM_ATOL: float = 1e-12
    UNITARY_ATOL: float = 1e-12
    HERMITIAN_ATOL: float = 1e-12
    TRACE_ATOL: float = 1e-12
    EIGEN_FLOOR: float = -1e-10
    PROBABILITY_ATOL: float = 1e-10
    POVM_ATOL: float = 1e-10
    BRANCH_CUTOFF: float = 1e-14
    ENTROPY_CUTOFF: float = 1e-12
    SUBSPACE_ATOL: float = 1e-10
    INFO_ATOL: float = 1e-9
    FIDELITY_ATOL: float = 1e-9

    # Desk-scale resource caps
    MAX_QUBITS: int = 12
    MAX_VIEW_INSTANCES: int = 3
    MAX_ALICE_VIEW_INSTANCES: int = 2
    MAX_CIRCUIT_QUBITS: int = 4
    MAX_T_GATES: int = 8
    MAX_RUNS: int = 1_000_000

    # XOR-homomorphic encryption (desk-scale, NOT secure parameters)
    HE_PRIME_BITS: int = 16
    HE_MIN_PRIME_BITS: int = 8
    HE_KEYGEN_RETRIES: int = 64

    # Report settings
    REPORT_SIGNIFICANT_DIGITS: int = 9

    # OpenTelemetry settings
    OTEL_ENABLED: bool = True
    OTEL_SERVICE_NAME: str = _service_name_from_env()
    OTEL_EXPORTER_OTLP_ENDPOINT: str = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT", "").strip()
    OTEL_EXPORTER_OTLP_HEADERS: str = os.getenv("OTEL_EXPORTER_OTLP_HEADERS", "").strip()
    OTEL_METRIC_EXPORT_INTERVAL_MS: int = 5000
    OTEL_METRIC_EXPORT_TIMEOUT: int = 10
    DEPLOYMENT_ENV: str = os.getenv("DEPLOYMENT_ENV", "development")

    # Logging settings
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    LOG_DATE_FORMAT: str = "%Y-%m-%d %H:%M:%S"
    LOG_TO_FILE: bool = False
    LOG_FILE_PATH: str = "logs/qxot.log"
    LOG_FILE_MAX_BYTES: int = 10_485_760  # 10MB
    LOG_FILE_BACKUP_COUNT: int = 5

    @property
    def otel_headers_dict(self) -> Dict[str, str]:
        """Parse OTLP headers into a dictionary."""
        headers = {}
        if self.OTEL_EXPORTER_OTLP_HEADERS:
            for header in self.OTEL_EXPORTER_OTLP_HEADERS.split(","):
                if "=" in header:
                    key, value = header.split("=", 1)
                    headers[key.strip()] = value.strip()
        return headers

    @property
    def otel_resource_attributes(self) -> Dict[str, Any]:
        """Get OpenTelemetry resource attributes."""
        return {
            "service.name": self.OTEL_SERVICE_NAME,
            "service.version": self.APP_VERSION,
            "deployment.environment": self.DEPLOYMENT_ENV,
        }

    @property
    def tolerance_names(self) -> tuple[str, ...]:
        return tuple(
            name
            for name in type(self).model_fields
            if name.endswith(("_ATOL", "_CUTOFF")) or name == "EIGEN_FLOOR"
        )

    def get_formatted_endpoint(self) -> str:
        """Format the OTLP endpoint for gRPC."""
        endpoint = self.OTEL_EXPORTER_OTLP_ENDPOINT
        if endpoint.startswith(("http://", "https://")):
            endpoint = endpoint.split("://")[1]
        return endpoint

    class Config:
        env_file = ".env"
        env_prefix = "QXOT_"
        case_sensitive = True


# Create global settings instance
settings = Settings()
