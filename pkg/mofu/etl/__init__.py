"""File formats of the mofu artifacts: lookup tables, scripts, traces and measurements."""
