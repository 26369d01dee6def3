# storage/__init__.py

from .traces import write_traces, read_traces, export_traces_csv, import_traces_csv
from .shots import write_shots, read_shots, export_shots_csv, import_shots_csv
from .spectra import write_spectrum_csv, read_spectrum_csv
from .provenance import write_sidecar, read_sidecar, sidecar_config

__all__ = [
    'write_traces',
    'read_traces',
    'export_traces_csv',
    'import_traces_csv',
    'write_shots',
    'read_shots',
    'export_shots_csv',
    'import_shots_csv',
    'write_spectrum_csv',
    'read_spectrum_csv',
    'write_sidecar',
    'read_sidecar',
    'sidecar_config',
]
