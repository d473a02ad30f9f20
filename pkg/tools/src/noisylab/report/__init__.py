from .svg_chart import Series, SvgChart, emit_plot
from .sweep import AggregateRow, RunOutcome, Sweep, SweepReport, AGGREGATE_FILE
