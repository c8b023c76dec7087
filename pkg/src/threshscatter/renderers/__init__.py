"""
Renderers for ThreshScatter.
Writes run reports as CSV tables and JSON summaries.
"""
