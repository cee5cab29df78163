use std::ffi::CString;

use pyo3::prelude::*;

use prolate_py::prolate_py;

fn run(code: &str) -> PyResult<()> {
    pyo3::append_to_inittab!(prolate_py);
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        py.run(&code, None, None)
    })
}


#[test]
fn module_round_trip() {
    run(r#"
import prolate_py as p
h = p.Family.hermite()
rep = h.solve(6, 0.5)
assert rep.order == 2
assert rep.labels[0] == "I"
assert rep.window[:2] == (0, 6)
d = rep.commutation_defects()
assert d["continuous"] < 1e-6 and d["discrete"] < 1e-8
sc = rep.spectral_check()
assert max(sc["residuals"]) < 1e-4
try:
    p.Family.jacobi(0.5, -3.0)
    raise SystemExit("accepted b = -3")
except p.ProlateError as e:
    assert "b > -1" in str(e)
"#)
    .unwrap();
}
