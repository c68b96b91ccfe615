"""Collects acceptance outcomes and prints one line per criterion after the run."""

_OUTCOMES: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, title = props["criterion"]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _OUTCOMES[number] = (status, title, props.get("measured", ""))


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", (marker.args[0], marker.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        status, title, measured = _OUTCOMES[number]
        line = f"criterion {number:>2} {status}  {title}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
