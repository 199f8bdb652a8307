"""phmprep: preprocessing pipeline and baseline diagnostics models for
machinery condition-monitoring data."""

from .frame import (
    CategoricalEncoding,
    EventLog,
    EventRecord,
    SensorFrame,
    encode_categorical,
    load_event_log,
    load_sensor_frame,
    save_event_log,
    save_sensor_frame,
)

__version__ = "0.1.0"

__all__ = [
    "CategoricalEncoding", "EventLog", "EventRecord", "SensorFrame",
    "encode_categorical", "load_event_log", "load_sensor_frame",
    "save_event_log", "save_sensor_frame",
]
