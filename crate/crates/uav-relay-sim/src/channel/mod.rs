//! Per-time-slot channel realizations.
//!
//! Air-to-ground links (GBS-relay, relay-user, relay-eavesdropper) follow a
//! Rician model: a deterministic line-of-sight steering component plus
//! i.i.d. complex Gaussian scattering, mixed by the Rician factor `beta` and
//! scaled by `sqrt(lambda0) / d^alpha`. Ground-to-ground links (GBS-user,
//! GBS-eavesdropper) use the alpha-beta-gamma path-loss law with log-normal
//! shadowing and Rayleigh small-scale fading.
//!
//! ```
//! use uav_relay_sim::channel::{a2g_mimo_channel, A2GParams, Position3D};
//! use uav_relay_sim::numerics::SeededRng;
//!
//! let params = A2GParams::default();
//! let gbs = Position3D::new(0.0, 0.0, 25.0);
//! let uav = Position3D::new(40.0, 10.0, 60.0);
//! let mut rng = SeededRng::new(7);
//! let h1 = a2g_mimo_channel(&gbs, &uav, 4, 2, &params, &mut rng).unwrap();
//! assert_eq!((h1.rows(), h1.cols()), (2, 4));
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::numerics::{complex_gaussian, ComplexMatrix, SeededRng};

/// Cartesian position in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position3D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn ground_distance(&self, other: &Position3D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Air-to-ground Rician channel parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct A2GParams {
    /// Linear path gain at the 1 m reference distance.
    pub lambda0: f64,
    /// Path-loss exponent applied to the amplitude (received power scales as
    /// `d^(-2*alpha)`).
    pub alpha: f64,
    /// Rician factor: LoS-to-scatter power ratio.
    pub beta: f64,
    /// Carrier wavelength in meters.
    pub carrier_wavelength: f64,
    /// Element spacing of the uniform linear arrays, in meters.
    pub antenna_separation: f64,
}

impl Default for A2GParams {
    fn default() -> Self {
        // Half-wavelength arrays at 2.4 GHz.
        let wavelength = 0.125;
        Self {
            lambda0: 1.0,
            alpha: 1.0,
            beta: 10.0,
            carrier_wavelength: wavelength,
            antenna_separation: wavelength / 2.0,
        }
    }
}

/// Alpha-beta-gamma ground-to-ground path-loss parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct G2GParams {
    /// Distance exponent.
    pub rho_g: f64,
    /// Frequency exponent.
    pub gamma_g: f64,
    /// Intercept in dB.
    pub intercept_j: f64,
    /// Shadow-fading standard deviation in dB.
    pub shadow_sigma: f64,
    /// Carrier frequency in GHz.
    pub carrier_freq: f64,
}

impl Default for G2GParams {
    fn default() -> Self {
        Self {
            rho_g: 3.0,
            gamma_g: 2.0,
            intercept_j: 20.0,
            shadow_sigma: 4.0,
            carrier_freq: 2.4,
        }
    }
}

/// All channel matrices for one time slot.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    /// GBS to directly served users, K_b x M.
    pub h0: ComplexMatrix,
    /// GBS to relay, N x M.
    pub h1: ComplexMatrix,
    /// Relay to relay-served users, K_r x N.
    pub h2: ComplexMatrix,
    /// GBS to eavesdroppers, E x M.
    pub h0e: ComplexMatrix,
    /// Relay to eavesdroppers, E x N.
    pub h2e: ComplexMatrix,
}

/// Geometry and radio parameters needed to realize one slot of channels.
#[derive(Clone, Debug)]
pub struct LinkGeometry {
    pub gbs: Position3D,
    pub uav: Position3D,
    pub direct_users: Vec<Position3D>,
    pub relay_users: Vec<Position3D>,
    pub eavesdroppers: Vec<Position3D>,
    /// GBS array size M.
    pub gbs_antennas: usize,
    /// Relay array size N.
    pub relay_antennas: usize,
    pub a2g: A2GParams,
    pub g2g: G2GParams,
}

/// ULA steering vector of length `n` for a directional cosine `component`.
/// Entry k is `exp(-j * 2*pi/wavelength * k * separation * component)`; all
/// entries have unit modulus.
pub fn steering_vector(
    n: usize,
    wavelength: f64,
    separation: f64,
    component: f64,
) -> Vec<Complex64> {
    let base = -2.0 * std::f64::consts::PI / wavelength * separation * component;
    (0..n)
        .map(|k| Complex64::from_polar(1.0, base * k as f64))
        .collect()
}

struct Angles {
    azimuth: f64,
    elevation: f64,
}

/// Azimuth/elevation of the ray from `from` toward `to`. Arrays are oriented
/// along the x-axis.
fn ray_angles(from: &Position3D, to: &Position3D) -> Angles {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let dz = to.z - from.z;
    Angles {
        azimuth: dy.atan2(dx),
        elevation: dz.atan2((dx * dx + dy * dy).sqrt()),
    }
}

fn check_distinct(tx: &Position3D, rx: &Position3D) -> Result<f64> {
    let d = tx.distance(rx);
    if d == 0.0 {
        return Err(SimError::Domain(
            "coincident transmitter and receiver positions".into(),
        ));
    }
    Ok(d)
}

/// Rician MIMO channel between two arrays, `rx_antennas x tx_antennas`.
///
/// The LoS part is the outer product of the arrival steering vector (cosine
/// component `cos(azimuth) * sin(elevation)` at the receiver) and the
/// departure steering vector (`sin(elevation) * cos(azimuth)` at the
/// transmitter); scattering is i.i.d. CN(0,1).
pub fn a2g_mimo_channel(
    tx_pos: &Position3D,
    rx_pos: &Position3D,
    tx_antennas: usize,
    rx_antennas: usize,
    params: &A2GParams,
    rng: &mut SeededRng,
) -> Result<ComplexMatrix> {
    let d = check_distinct(tx_pos, rx_pos)?;
    let arrival = ray_angles(rx_pos, tx_pos);
    let departure = ray_angles(tx_pos, rx_pos);
    let aoa_component = arrival.azimuth.cos() * arrival.elevation.sin();
    let aod_component = departure.elevation.sin() * departure.azimuth.cos();
    let g_a = steering_vector(
        rx_antennas,
        params.carrier_wavelength,
        params.antenna_separation,
        aoa_component,
    );
    let g_d = steering_vector(
        tx_antennas,
        params.carrier_wavelength,
        params.antenna_separation,
        aod_component,
    );
    let nlos = complex_gaussian(rx_antennas, tx_antennas, 1.0, rng);
    let amp = params.lambda0.sqrt() / d.powf(params.alpha);
    let w_los = (params.beta / (1.0 + params.beta)).sqrt();
    let w_nlos = (1.0 / (1.0 + params.beta)).sqrt();
    Ok(ComplexMatrix::from_fn(rx_antennas, tx_antennas, |i, j| {
        amp * (w_los * g_a[i] * g_d[j] + w_nlos * nlos[(i, j)])
    }))
}

/// Rician MISO channel from an array to a single-antenna node, `1 x
/// tx_antennas`. The LoS row is the departure steering vector with cosine
/// component `cos(azimuth) * sin(elevation)`.
pub fn a2g_miso_channel(
    tx_pos: &Position3D,
    rx_pos: &Position3D,
    tx_antennas: usize,
    params: &A2GParams,
    rng: &mut SeededRng,
) -> Result<ComplexMatrix> {
    let d = check_distinct(tx_pos, rx_pos)?;
    let departure = ray_angles(tx_pos, rx_pos);
    let aod_component = departure.azimuth.cos() * departure.elevation.sin();
    let g_d = steering_vector(
        tx_antennas,
        params.carrier_wavelength,
        params.antenna_separation,
        aod_component,
    );
    let nlos = complex_gaussian(1, tx_antennas, 1.0, rng);
    let amp = params.lambda0.sqrt() / d.powf(params.alpha);
    let w_los = (params.beta / (1.0 + params.beta)).sqrt();
    let w_nlos = (1.0 / (1.0 + params.beta)).sqrt();
    Ok(ComplexMatrix::from_fn(1, tx_antennas, |_, j| {
        amp * (w_los * g_d[j] + w_nlos * nlos[(0, j)])
    }))
}

/// Alpha-beta-gamma path loss in dB for a 2D distance `d` in meters:
/// `10*rho*log10(d) + intercept + 10*gamma*log10(f_c) + shadowing`.
pub fn g2g_pathloss_db(d: f64, params: &G2GParams, rng: &mut SeededRng) -> Result<f64> {
    if d < 1.0 {
        return Err(SimError::Domain(format!(
            "g2g path loss needs d >= 1 m (model validity), got {d} m"
        )));
    }
    let shadow = if params.shadow_sigma > 0.0 {
        rng.normal(0.0, params.shadow_sigma)
    } else {
        0.0
    };
    Ok(10.0 * params.rho_g * d.log10()
        + params.intercept_j
        + 10.0 * params.gamma_g * params.carrier_freq.log10()
        + shadow)
}

/// Rayleigh row scaled by the ABG linear amplitude gain `10^(-PL/20)`.
fn g2g_row(
    tx: &Position3D,
    rx: &Position3D,
    antennas: usize,
    params: &G2GParams,
    rng: &mut SeededRng,
) -> Result<ComplexMatrix> {
    let d = tx.ground_distance(rx).max(1.0);
    let pl = g2g_pathloss_db(d, params, rng)?;
    let gain = 10f64.powf(-pl / 20.0);
    Ok(complex_gaussian(1, antennas, 1.0, rng).scale_real(gain))
}

/// One time slot of channels for every link in the system.
///
/// Matrices are drawn in a fixed order (H1, H2 rows, relay-eavesdropper rows,
/// H0 rows, GBS-eavesdropper rows) so that a given rng state yields a
/// deterministic `ChannelSet`.
pub fn realize_channels(geom: &LinkGeometry, rng: &mut SeededRng) -> Result<ChannelSet> {
    let m = geom.gbs_antennas;
    let n = geom.relay_antennas;
    let h1 = a2g_mimo_channel(&geom.gbs, &geom.uav, m, n, &geom.a2g, rng)?;

    let mut h2_rows = Vec::with_capacity(geom.relay_users.len());
    for user in &geom.relay_users {
        h2_rows.push(a2g_miso_channel(&geom.uav, user, n, &geom.a2g, rng)?);
    }
    let h2 = stack_rows(h2_rows, n);

    let mut h2e_rows = Vec::with_capacity(geom.eavesdroppers.len());
    for eve in &geom.eavesdroppers {
        h2e_rows.push(a2g_miso_channel(&geom.uav, eve, n, &geom.a2g, rng)?);
    }
    let h2e = stack_rows(h2e_rows, n);

    let mut h0_rows = Vec::with_capacity(geom.direct_users.len());
    for user in &geom.direct_users {
        h0_rows.push(g2g_row(&geom.gbs, user, m, &geom.g2g, rng)?);
    }
    let h0 = stack_rows(h0_rows, m);

    let mut h0e_rows = Vec::with_capacity(geom.eavesdroppers.len());
    for eve in &geom.eavesdroppers {
        h0e_rows.push(g2g_row(&geom.gbs, eve, m, &geom.g2g, rng)?);
    }
    let h0e = stack_rows(h0e_rows, m);

    Ok(ChannelSet { h0, h1, h2, h0e, h2e })
}

fn stack_rows(rows: Vec<ComplexMatrix>, cols: usize) -> ComplexMatrix {
    if rows.is_empty() {
        return ComplexMatrix::zeros(0, cols);
    }
    let refs: Vec<&ComplexMatrix> = rows.iter().collect();
    ComplexMatrix::vstack(&refs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn los_only_params() -> A2GParams {
        A2GParams {
            beta: 1e12,
            ..A2GParams::default()
        }
    }

    #[test]
    fn los_limit_unit_modulus_entries() {
        let p = los_only_params();
        let tx = Position3D::new(0.0, 0.0, 10.0);
        let rx = Position3D::new(30.0, 40.0, 60.0);
        let d = tx.distance(&rx);
        let expect = p.lambda0.sqrt() / d.powf(p.alpha);
        let mut rng = SeededRng::new(1);
        let g = a2g_mimo_channel(&tx, &rx, 3, 4, &p, &mut rng).unwrap();
        for z in g.entries() {
            assert!((z.norm() - expect).abs() / expect < 1e-4);
        }
    }

    #[test]
    fn steering_vector_half_wavelength() {
        // Upsilon = lambda/2 and unit cosine component: [1, e^{-j*pi}] = [1, -1].
        let v = steering_vector(2, 0.125, 0.0625, 1.0);
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((v[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_vector_zero_component_all_ones() {
        let v = steering_vector(4, 0.125, 0.0625, 0.0);
        for z in v {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn miso_los_limit_degenerate_array() {
        let p = los_only_params();
        let tx = Position3D::new(0.0, 0.0, 50.0);
        let rx = Position3D::new(3.0, 4.0, 0.0);
        let d = tx.distance(&rx);
        let mut rng = SeededRng::new(2);
        let h = a2g_miso_channel(&tx, &rx, 1, &p, &mut rng).unwrap();
        let expect = p.lambda0.sqrt() / d.powf(p.alpha);
        assert!((h[(0, 0)].norm() - expect).abs() / expect < 1e-4);
    }

    #[test]
    fn coincident_positions_rejected() {
        let p = A2GParams::default();
        let pos = Position3D::new(1.0, 2.0, 3.0);
        let mut rng = SeededRng::new(3);
        assert!(a2g_mimo_channel(&pos, &pos, 2, 2, &p, &mut rng).is_err());
        assert!(a2g_miso_channel(&pos, &pos, 2, &p, &mut rng).is_err());
    }

    #[test]
    fn rayleigh_limit_mean_power() {
        // beta = 0, lambda0 = 1, d = 1, alpha = 2: per-entry power ~ 1.
        let p = A2GParams {
            beta: 0.0,
            lambda0: 1.0,
            alpha: 2.0,
            ..A2GParams::default()
        };
        let tx = Position3D::new(0.0, 0.0, 0.0);
        let rx = Position3D::new(1.0, 0.0, 0.0);
        let mut rng = SeededRng::new(4);
        let mut acc = 0.0;
        let mut count = 0usize;
        for _ in 0..1000 {
            let g = a2g_mimo_channel(&tx, &rx, 10, 10, &p, &mut rng).unwrap();
            acc += g.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += g.entries().len();
        }
        let mean_power = acc / count as f64;
        assert!((mean_power - 1.0).abs() < 0.02, "mean power {mean_power}");
    }

    #[test]
    fn rician_power_split_sums_to_pathloss() {
        // E[|G_ij|^2] = lambda0 / d^(2 alpha) for any beta.
        for beta in [0.0, 1.0, 5.0] {
            let p = A2GParams {
                beta,
                lambda0: 2.0,
                alpha: 1.5,
                ..A2GParams::default()
            };
            let tx = Position3D::new(0.0, 0.0, 0.0);
            let rx = Position3D::new(2.0, 1.0, 2.0);
            let d = tx.distance(&rx);
            let expect = p.lambda0 / d.powf(2.0 * p.alpha);
            let mut rng = SeededRng::new(5);
            let mut acc = 0.0;
            let mut count = 0usize;
            for _ in 0..500 {
                let g = a2g_mimo_channel(&tx, &rx, 8, 8, &p, &mut rng).unwrap();
                acc += g.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
                count += g.entries().len();
            }
            let mean = acc / count as f64;
            assert!(
                (mean - expect).abs() / expect < 0.02,
                "beta {beta}: mean {mean} vs {expect}"
            );
        }
    }

    #[test]
    fn pathloss_intercept_only() {
        let p = G2GParams {
            rho_g: 2.0,
            gamma_g: 2.0,
            intercept_j: 30.0,
            shadow_sigma: 0.0,
            carrier_freq: 1.0,
        };
        let mut rng = SeededRng::new(6);
        let pl = g2g_pathloss_db(1.0, &p, &mut rng).unwrap();
        assert!((pl - 30.0).abs() < 1e-12);
    }

    #[test]
    fn pathloss_direct_formula() {
        let p = G2GParams {
            rho_g: 2.0,
            gamma_g: 2.0,
            intercept_j: 30.0,
            shadow_sigma: 0.0,
            carrier_freq: 1.0,
        };
        let mut rng = SeededRng::new(7);
        let pl = g2g_pathloss_db(10.0, &p, &mut rng).unwrap();
        assert!((pl - 50.0).abs() < 1e-12);
    }

    #[test]
    fn pathloss_shadowing_std() {
        let p = G2GParams {
            shadow_sigma: 8.0,
            ..G2GParams::default()
        };
        let mut rng = SeededRng::new(8);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| g2g_pathloss_db(50.0, &p, &mut rng).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        assert!((std - 8.0).abs() / 8.0 < 0.02, "std {std}");
    }

    #[test]
    fn pathloss_domain_error_below_one_meter() {
        let p = G2GParams::default();
        let mut rng = SeededRng::new(9);
        assert!(g2g_pathloss_db(0.5, &p, &mut rng).is_err());
    }

    #[test]
    fn pathloss_monotone_in_distance() {
        let p = G2GParams {
            shadow_sigma: 0.0,
            ..G2GParams::default()
        };
        let mut rng = SeededRng::new(10);
        let mut last = f64::NEG_INFINITY;
        for d in [1.0, 2.0, 5.0, 20.0, 100.0, 1000.0] {
            let pl = g2g_pathloss_db(d, &p, &mut rng).unwrap();
            assert!(pl > last);
            last = pl;
        }
    }

    fn small_geometry() -> LinkGeometry {
        LinkGeometry {
            gbs: Position3D::new(0.0, 0.0, 25.0),
            uav: Position3D::new(50.0, 50.0, 60.0),
            direct_users: vec![
                Position3D::new(10.0, 5.0, 0.0),
                Position3D::new(15.0, -5.0, 0.0),
            ],
            relay_users: vec![
                Position3D::new(60.0, 55.0, 0.0),
                Position3D::new(55.0, 65.0, 0.0),
            ],
            eavesdroppers: vec![Position3D::new(30.0, 30.0, 0.0)],
            gbs_antennas: 4,
            relay_antennas: 2,
            a2g: A2GParams::default(),
            g2g: G2GParams::default(),
        }
    }

    #[test]
    fn realize_shapes() {
        let geom = small_geometry();
        let mut rng = SeededRng::new(11);
        let ch = realize_channels(&geom, &mut rng).unwrap();
        assert_eq!((ch.h0.rows(), ch.h0.cols()), (2, 4));
        assert_eq!((ch.h1.rows(), ch.h1.cols()), (2, 4));
        assert_eq!((ch.h2.rows(), ch.h2.cols()), (2, 2));
        assert_eq!((ch.h0e.rows(), ch.h0e.cols()), (1, 4));
        assert_eq!((ch.h2e.rows(), ch.h2e.cols()), (1, 2));
        assert!(ch.h0.is_finite() && ch.h1.is_finite() && ch.h2.is_finite());
    }

    #[test]
    fn realize_deterministic() {
        let geom = small_geometry();
        let a = realize_channels(&geom, &mut SeededRng::new(12)).unwrap();
        let b = realize_channels(&geom, &mut SeededRng::new(12)).unwrap();
        assert_eq!(a.h0.entries(), b.h0.entries());
        assert_eq!(a.h1.entries(), b.h1.entries());
        assert_eq!(a.h2.entries(), b.h2.entries());
        assert_eq!(a.h0e.entries(), b.h0e.entries());
        assert_eq!(a.h2e.entries(), b.h2e.entries());
    }

    #[test]
    fn halved_distance_scales_power() {
        // alpha = 2: halving the 3D distance multiplies mean H2 power by 16.
        let a2g = A2GParams {
            alpha: 2.0,
            beta: 1.0,
            ..A2GParams::default()
        };
        let user = Position3D::new(0.0, 0.0, 0.0);
        let far = Position3D::new(0.0, 0.0, 80.0);
        let near = Position3D::new(0.0, 0.0, 40.0);
        let mut mean = |uav: &Position3D, seed: u64| {
            let mut rng = SeededRng::new(seed);
            let mut acc = 0.0;
            let mut cnt = 0usize;
            for _ in 0..10_000 {
                let h = a2g_miso_channel(uav, &user, 2, &a2g, &mut rng).unwrap();
                acc += h.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
                cnt += h.entries().len();
            }
            acc / cnt as f64
        };
        let ratio = mean(&near, 13) / mean(&far, 14);
        assert!((ratio - 16.0).abs() / 16.0 < 0.05, "ratio {ratio}");
    }
}
