def pytest_runtest_logreport(report):
    # acceptance tests print their own PASS line; mirror failures so the
    # gate always shows one line per criterion
    if report.when == "call" and report.failed and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {name}: FAIL")
