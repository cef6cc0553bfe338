use nalgebra::{Matrix2, SymmetricEigen};
use spinfisher::meanfield::{fixed_points, ClassicalParams, Stability};
use spinfisher::model::IdealModel;
use spinfisher::spin::covariance;

#[test]
fn quantum_spread_follows_unstable_manifold() {
    let model = IdealModel::reference();
    let classical = ClassicalParams::from_hamiltonian(&model.params, model.n_atoms()).unwrap();
    let saddle = fixed_points(&classical)
        .unwrap()
        .into_iter()
        .find(|f| f.stability == Stability::Unstable)
        .unwrap();
    assert!(saddle.point.z.abs() < 1e-9 && (saddle.point.phi - std::f64::consts::PI).abs() < 1e-12);
    let [dz, dphi] = saddle.unstable_direction.unwrap();
    // near the −x pole a phase shift dφ moves the spin by −dφ along y
    let classical_angle = dz.atan2(-dphi);

    for t in [0.010, 0.015, 0.020] {
        let state = model.state_at(t).unwrap();
        let cov = covariance(&state, model.ops()).unwrap();
        let yz = Matrix2::new(cov[(1, 1)], cov[(1, 2)], cov[(2, 1)], cov[(2, 2)]);
        let eig = SymmetricEigen::new(yz);
        let k = if eig.eigenvalues[0] > eig.eigenvalues[1] { 0 } else { 1 };
        let v = eig.eigenvectors.column(k);
        let quantum_angle = v[1].atan2(v[0]);
        let mut diff = (quantum_angle - classical_angle).rem_euclid(std::f64::consts::PI);
        if diff > std::f64::consts::FRAC_PI_2 {
            diff = std::f64::consts::PI - diff;
        }
        assert!(diff.to_degrees() < 5.0, "t = {t}: {:.2}°", diff.to_degrees());
    }
}
