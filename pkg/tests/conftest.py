from contextlib import contextmanager

import pytest

import selfx
from selfx.bundle import bundled_text

ACCEPTANCE_RESULTS = []


@contextmanager
def criterion(number: int, description: str):
    """Records one pass/fail line per acceptance criterion."""
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS.append(f"criterion {number}: FAIL - {description}")
        raise
    ACCEPTANCE_RESULTS.append(f"criterion {number}: PASS - {description}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)


def load_bundled(kb, *names):
    for name in names:
        selfx.load(selfx.parse(bundled_text(name)), kb)
    return kb


SCENARIO = ("camera.sxdl", "detector.sxdl", "environment.sxdl")
FULL = ("camera.sxdl", "detector.sxdl", "visual_chain.sxdl",
        "acoustic_chain.sxdl", "environment.sxdl", "behaviors.sxdl")


@pytest.fixture
def kb():
    return selfx.new_kb()


@pytest.fixture
def scenario_kb():
    kb = selfx.new_kb()
    load_bundled(kb, *SCENARIO)
    return kb


@pytest.fixture
def inferred_scenario_kb(scenario_kb):
    selfx.infer_to_fixpoint(scenario_kb)
    return scenario_kb


@pytest.fixture
def full_kb():
    kb = selfx.new_kb()
    load_bundled(kb, *FULL)
    selfx.infer_to_fixpoint(kb)
    return kb


def build_reference_camera(kb):
    """A minimal complete camera built through the raw API: an electrical
    power NFR and a light ER, nothing else."""
    kb.define_class("RGBCamera", "Sensor")
    kb.define_class("CameraImage", "Signal")
    cam = kb.assert_instance("RGBCamera")
    health = kb.assert_instance("HealthState", False)
    kb.add_has(cam.id, health.id)
    img = kb.assert_instance("CameraImage")
    for attr_class, value in (("ROSmsgs", "sensor_msgs/image"),
                              ("ROStopic", "/image_raw"),
                              ("FPS", 30.0), ("Quality", float("nan"))):
        attr = kb.assert_instance(attr_class, value)
        kb.add_has(img.id, attr.id)

    f1 = kb.assert_instance("Featuring")
    power = kb.assert_instance("ElectricalPower")
    kb.add_role(power.id, "subject", f1.id)
    voltage = kb.assert_instance("Voltage", "volt")
    exact5 = kb.assert_instance("Exact", 5.0)
    kb.add_has(voltage.id, exact5.id)
    kb.add_role(voltage.id, "feature", f1.id)
    watts = kb.assert_instance("Power", "Watt")
    min5 = kb.assert_instance("Min", 5.0)
    kb.add_has(watts.id, min5.id)
    kb.add_role(watts.id, "feature", f1.id)

    f2 = kb.assert_instance("Featuring")
    light = kb.assert_instance("Light")
    kb.add_role(light.id, "subject", f2.id)
    wavelength = kb.assert_instance("Wavelength", "nm")
    kb.add_has(wavelength.id, kb.assert_instance("Min", 400.0).id)
    kb.add_has(wavelength.id, kb.assert_instance("Max", 700.0).id)
    kb.add_role(wavelength.id, "feature", f2.id)
    intensity = kb.assert_instance("Intensity", "Lumen")
    kb.add_has(intensity.id, kb.assert_instance("Min", 500.0).id)
    kb.add_role(intensity.id, "feature", f2.id)

    nfr = kb.assert_instance("NonFunctionalRequirement")
    kb.add_role(nfr.id, "petitioner", cam.id)
    kb.add_role(nfr.id, "outcome", img.id)
    kb.add_role(nfr.id, "service", f1.id)
    er = kb.assert_instance("EnvironmentalRequirement")
    kb.add_role(er.id, "petitioner", cam.id)
    kb.add_role(er.id, "outcome", img.id)
    kb.add_role(er.id, "state", f2.id)
    return {"cam": cam, "img": img, "f1": f1, "f2": f2, "nfr": nfr, "er": er,
            "power": power, "light": light, "health": health}
