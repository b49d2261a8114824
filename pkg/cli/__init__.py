# Command line surface: scenario files in, JSON reports and CSV tables out
