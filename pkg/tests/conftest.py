"""Prints one PASS/FAIL line per acceptance criterion at the end of a run."""


def _criterion_registry():
    import test_acceptance

    registry = {}
    for name in dir(test_acceptance):
        tag = getattr(getattr(test_acceptance, name), "_criterion", None)
        if tag is not None:
            registry[name] = tag
    return registry


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        registry = _criterion_registry()
    except ImportError:
        return
    lines = []
    for status, word in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", "call") != "call":
                continue
            test_name = report.nodeid.split("::")[-1]
            if test_name in registry:
                number, description = registry[test_name]
                lines.append((number, f"ACCEPTANCE {number:2d} {word}  {description}"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
