use curvcrit::grid::{eigenfields, DomainSpec, Field};
use curvcrit::thresholds::{estimate_sobolev_constants, rayleigh_quotient, SobolevOptions};

fn eigen_plane(domain: &DomainSpec) -> (Field, Field) {
    let mut modes = eigenfields(domain, 2).into_iter().map(|(_, f)| f);
    (modes.next().unwrap(), modes.next().unwrap())
}

#[test]
fn estimates_sit_below_the_first_eigenfield_quotient() {
    let domain = DomainSpec::unit_cube(3, 9).unwrap();
    let c = estimate_sobolev_constants(&domain, 1.5, &SobolevOptions::default()).unwrap();
    let (e1, _) = eigen_plane(&domain);
    assert!(c.s > 0.0 && c.sq > 0.0);
    assert!(c.sq <= rayleigh_quotient(&e1, 1.5));
    assert!(c.s <= rayleigh_quotient(&e1, 6.0));
}

#[test]
fn critical_constant_does_not_grow_under_refinement() {
    let opts = SobolevOptions::default();
    let coarse =
        estimate_sobolev_constants(&DomainSpec::unit_cube(3, 9).unwrap(), 1.5, &opts).unwrap();
    let fine =
        estimate_sobolev_constants(&DomainSpec::unit_cube(3, 17).unwrap(), 1.5, &opts).unwrap();
    assert!(fine.s < coarse.s, "{} vs {}", fine.s, coarse.s);
}

#[test]
fn critical_constant_is_below_the_eigen_plane_minimum() {
    // dense scan of Q over unit directions in span{e1, e2}
    let domain = DomainSpec::unit_cube(3, 9).unwrap();
    let (e1, e2) = eigen_plane(&domain);
    let plane_min = (0..720)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / 720.0;
            rayleigh_quotient(&e1.scaled(t.cos()).axpy(t.sin(), &e2), 6.0)
        })
        .fold(f64::INFINITY, f64::min);
    let s = estimate_sobolev_constants(&domain, 1.5, &SobolevOptions::default())
        .unwrap()
        .s;
    // the plane contains only smooth fields, whereas the critical quotient is
    // minimized by fields concentrating at a node, so S lies far below
    assert!(s <= plane_min, "{s} vs {plane_min}");
}
