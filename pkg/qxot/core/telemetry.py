"""OpenTelemetry instrumentation for simulation runs."""

from opentelemetry import metrics
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.metrics.export import MetricReader, PeriodicExportingMetricReader
from opentelemetry.exporter.otlp.proto.grpc.metric_exporter import OTLPMetricExporter
from opentelemetry.sdk.resources import Resource
from .config import settings
from .logging import get_logger

logger = get_logger("telemetry")


class Telemetry:
    """Run metrics tracking."""

    def __init__(self, meter):
        """Initialize telemetry with OpenTelemetry meter."""
        self.meter = meter

        # Counter: completed runs per command and variant
        self.runs = self.meter.create_counter(
            name=f"{settings.OTEL_SERVICE_NAME}_runs_total",
            description="Total number of completed simulation runs",
            unit="1",
        )

        # Histogram: wall-clock duration of a command
        self.run_duration = self.meter.create_histogram(
            name=f"{settings.OTEL_SERVICE_NAME}_run_duration_seconds",
            description="Simulation run duration in seconds",
            unit="s",
        )

        # Counter: failed invariant checks
        self.invariant_violations = self.meter.create_counter(
            name=f"{settings.OTEL_SERVICE_NAME}_invariant_violations_total",
            description="Total number of invariant violations detected",
            unit="1",
        )

    def track_run(self, command: str, variant: str, duration_seconds: float, runs: int = 1):
        """Track run metrics.

        Args:
            command: CLI subcommand name
            variant: protocol variant or scenario id
            duration_seconds: command duration in seconds
            runs: number of independent runs the command performed
        """
        attributes = {"command": command, "variant": variant}
        self.runs.add(runs, attributes)
        self.run_duration.record(duration_seconds, attributes)

    def track_violation(self, command: str, kind: str):
        self.invariant_violations.add(1, {"command": command, "kind": kind})


def setup_telemetry(reader: MetricReader | None = None) -> None:
    """Initialize OpenTelemetry metrics.

    An explicit ``reader`` bypasses the OTLP exporter configuration.
    """
    global _telemetry

    resource = Resource.create(settings.otel_resource_attributes)

    if reader is not None:
        provider = MeterProvider(metric_readers=[reader], resource=resource)
        _telemetry = Telemetry(provider.get_meter(settings.APP_NAME))
        return

    if not settings.OTEL_ENABLED:
        logger.debug("OpenTelemetry is disabled")
        return

    if not settings.OTEL_EXPORTER_OTLP_ENDPOINT:
        logger.debug("OpenTelemetry disabled: OTEL_EXPORTER_OTLP_ENDPOINT not set")
        return

    if _telemetry is not None:
        return

    try:
        exporter_reader = PeriodicExportingMetricReader(
            OTLPMetricExporter(
                endpoint=settings.get_formatted_endpoint(),
                insecure=True if "localhost" in settings.OTEL_EXPORTER_OTLP_ENDPOINT else False,
                headers=settings.otel_headers_dict,
                timeout=settings.OTEL_METRIC_EXPORT_TIMEOUT,
            ),
            export_interval_millis=settings.OTEL_METRIC_EXPORT_INTERVAL_MS,
        )

        provider = MeterProvider(
            metric_readers=[exporter_reader],
            resource=resource,
        )

        metrics.set_meter_provider(provider)
        _telemetry = Telemetry(metrics.get_meter(settings.APP_NAME))

        logger.info("OpenTelemetry initialized with run metrics")

    except Exception as e:
        logger.error(f"Failed to initialize OpenTelemetry: {e}")


# Global telemetry instance
_telemetry = None


def get_telemetry():
    """Get the global telemetry instance."""
    return _telemetry
