from .record_trace import RecordTraceWrapper, read_trace, write_trace

__all__ = ["RecordTraceWrapper", "read_trace", "write_trace"]
