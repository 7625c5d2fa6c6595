use std::cmp::Ordering;

use super::{Allocation, DispatchError, IntervalPrices, IntervalRevenue, SocState, StrategyConfig};
use crate::model::BatterySpec;

/// Level vector in product order: FCR-N, FCR-D up, FCR-D down, FFR, spot buy, spot sell.
pub(crate) type Levels = [u32; 6];

pub(crate) fn tolerance(battery: &BatterySpec) -> f64 {
    1e-9 * battery.energy_capacity_mwh().max(battery.rated_power_mw())
}

/// Stored energy after the allocation's energy flows.
pub(crate) fn soc_after(battery: &BatterySpec, soc: f64, a: &Allocation) -> f64 {
    soc + battery.charge_efficiency() * (a.spot_bought_mwh + a.activation_import_mwh)
        - (a.spot_sold_mwh + a.activation_export_mwh) / battery.discharge_efficiency()
}

fn activation_energies(cfg: &StrategyConfig, a: &Allocation, duration_h: f64) -> (f64, f64) {
    // FCR-N activates symmetrically, half of the activated time in each direction
    let f = cfg.activation_fraction;
    let export = f * (0.5 * a.fcr_n_mw + a.fcr_d_up_mw + a.ffr_mw) * duration_h;
    let import = f * (0.5 * a.fcr_n_mw + a.fcr_d_down_mw) * duration_h;
    (export, import)
}

/// The first rule an allocation breaks. Kept free of allocation so the
/// exhaustive searches can reject candidates cheaply.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Violation {
    NonFinite,
    BuyAndSell,
    Upward(f64, f64),
    Downward(f64, f64),
    SpotEnergy,
    Activation,
    SocBound(f64),
    UpwardBacking { need: f64, have: f64, at_end: bool },
    DownwardBacking { need: f64, have: f64, at_end: bool },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let at = |end: bool| if end { "end" } else { "start" };
        match self {
            Violation::NonFinite => write!(f, "quantities must be finite and non-negative"),
            Violation::BuyAndSell => write!(f, "spot purchase and sale in the same interval"),
            Violation::Upward(mw, p) => write!(f, "upward commitment {mw} MW exceeds {p} MW"),
            Violation::Downward(mw, p) => write!(f, "downward commitment {mw} MW exceeds {p} MW"),
            Violation::SpotEnergy => write!(f, "spot energy exceeds committed power"),
            Violation::Activation => write!(
                f,
                "activation energy does not match the activation fraction"
            ),
            Violation::SocBound(end) => write!(f, "state of charge would reach {end} MWh"),
            Violation::UpwardBacking { need, have, at_end } => write!(
                f,
                "upward reserves need {need} MWh stored at interval {}, have {have}",
                at(*at_end)
            ),
            Violation::DownwardBacking { need, have, at_end } => write!(
                f,
                "downward reserves need {need} MWh headroom at interval {}, have {have}",
                at(*at_end)
            ),
        }
    }
}

fn violation(
    battery: &BatterySpec,
    cfg: &StrategyConfig,
    soc_mwh: f64,
    a: &Allocation,
    duration_h: f64,
) -> Option<Violation> {
    let tol = tolerance(battery);
    let cap = battery.energy_capacity_mwh();
    let power = battery.rated_power_mw();
    let fields = [
        a.fcr_n_mw,
        a.fcr_d_up_mw,
        a.fcr_d_down_mw,
        a.ffr_mw,
        a.spot_buy_mw,
        a.spot_sell_mw,
        a.spot_bought_mwh,
        a.spot_sold_mwh,
        a.activation_export_mwh,
        a.activation_import_mwh,
    ];
    if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Some(Violation::NonFinite);
    }
    if a.spot_buy_mw > 0.0 && a.spot_sell_mw > 0.0 {
        return Some(Violation::BuyAndSell);
    }
    if a.upward_mw() > power + tol {
        return Some(Violation::Upward(a.upward_mw(), power));
    }
    if a.downward_mw() > power + tol {
        return Some(Violation::Downward(a.downward_mw(), power));
    }
    if a.spot_bought_mwh > a.spot_buy_mw * duration_h + tol
        || a.spot_sold_mwh > a.spot_sell_mw * duration_h + tol
    {
        return Some(Violation::SpotEnergy);
    }
    let (export, import) = activation_energies(cfg, a, duration_h);
    if (export - a.activation_export_mwh).abs() > tol
        || (import - a.activation_import_mwh).abs() > tol
    {
        return Some(Violation::Activation);
    }
    let up_need = a.upward_reserve_mw() * cfg.backing_hours;
    let down_need = a.downward_reserve_mw() * cfg.backing_hours;
    let end = soc_after(battery, soc_mwh, a);
    if end < -tol || end > cap + tol {
        return Some(Violation::SocBound(end));
    }
    for (at_end, soc) in [(false, soc_mwh), (true, end)] {
        if soc + tol < up_need {
            return Some(Violation::UpwardBacking {
                need: up_need,
                have: soc,
                at_end,
            });
        }
        if cap - soc + tol < down_need {
            return Some(Violation::DownwardBacking {
                need: down_need,
                have: cap - soc,
                at_end,
            });
        }
    }
    None
}

/// Validates an allocation against capacity, backing and SoC-bound rules.
pub fn check_allocation(
    battery: &BatterySpec,
    cfg: &StrategyConfig,
    soc_mwh: f64,
    a: &Allocation,
    duration_h: f64,
) -> Result<(), DispatchError> {
    match violation(battery, cfg, soc_mwh, a, duration_h) {
        None => Ok(()),
        Some(v) => Err(DispatchError::InfeasibleAllocation(v.to_string())),
    }
}

/// Turns grid levels into a concrete allocation, running spot trades until
/// energy or headroom is exhausted. `None` when infeasible.
pub(crate) fn resolve(
    battery: &BatterySpec,
    cfg: &StrategyConfig,
    soc_mwh: f64,
    levels: Levels,
    duration_h: f64,
) -> Option<Allocation> {
    let mw = |l: u32| l as f64 * cfg.step_mw;
    let mut a = Allocation {
        fcr_n_mw: mw(levels[0]),
        fcr_d_up_mw: mw(levels[1]),
        fcr_d_down_mw: mw(levels[2]),
        ffr_mw: mw(levels[3]),
        spot_buy_mw: mw(levels[4]),
        spot_sell_mw: mw(levels[5]),
        ..Allocation::default()
    };
    let (export, import) = activation_energies(cfg, &a, duration_h);
    a.activation_export_mwh = export;
    a.activation_import_mwh = import;

    let ec = battery.charge_efficiency();
    let ed = battery.discharge_efficiency();
    let soc_act = soc_mwh + ec * import - export / ed;
    if a.spot_sell_mw > 0.0 {
        let room = (soc_act - a.upward_reserve_mw() * cfg.backing_hours) * ed;
        a.spot_sold_mwh = (a.spot_sell_mw * duration_h).min(room.max(0.0));
    }
    if a.spot_buy_mw > 0.0 {
        let room =
            (battery.energy_capacity_mwh() - a.downward_reserve_mw() * cfg.backing_hours - soc_act)
                / ec;
        a.spot_bought_mwh = (a.spot_buy_mw * duration_h).min(room.max(0.0));
    }
    violation(battery, cfg, soc_mwh, &a, duration_h)
        .is_none()
        .then_some(a)
}

/// Revenue comparison with a relative tie band, so that float noise between
/// equal-valued allocations falls through to the deterministic tie-break.
pub(crate) fn compare_revenue(a: f64, b: f64) -> Ordering {
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= 1e-12 * scale {
        Ordering::Equal
    } else if a > b {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// `Greater` when `a` is preferred over `b` at equal revenue: fewer committed
/// steps first, then commitment placed on earlier products.
pub(crate) fn tie_break(a: &Levels, b: &Levels) -> Ordering {
    let ta: u32 = a.iter().sum();
    let tb: u32 = b.iter().sum();
    tb.cmp(&ta).then_with(|| a.cmp(b))
}

pub(crate) fn check_soc(battery: &BatterySpec, soc_mwh: f64) -> Result<(), DispatchError> {
    let tol = tolerance(battery);
    let cap = battery.energy_capacity_mwh();
    if !soc_mwh.is_finite() || soc_mwh < -tol || soc_mwh > cap + tol {
        return Err(DispatchError::InfeasibleSoc {
            soc: soc_mwh,
            capacity: cap,
        });
    }
    Ok(())
}

/// The revenue-maximizing allocation for one interval over the discrete grid.
///
/// Ties prefer idling, then fewer committed MW, then commitment on products
/// earlier in [`super::MarketProduct`] order.
pub fn allocate_interval(
    battery: &BatterySpec,
    cfg: &StrategyConfig,
    state: &SocState,
    prices: &IntervalPrices,
    duration_h: f64,
) -> Result<(Allocation, IntervalRevenue), DispatchError> {
    let n = cfg.levels(battery.rated_power_mw())?;
    check_soc(battery, state.soc_mwh)?;

    // FCR-D up and FFR face identical constraints, so only the better paid one
    // ever carries the upward reserve block (FCR-D up on a price tie).
    let ffr_slot = prices.ffr > prices.fcr_d_up;

    let mut best: Option<(Levels, Allocation, IntervalRevenue, f64)> = None;
    for fcr_n in 0..=n {
        for up in 0..=n - fcr_n {
            for sell in 0..=n - fcr_n - up {
                for down in 0..=n - fcr_n {
                    for buy in 0..=n - fcr_n - down {
                        if buy > 0 && sell > 0 {
                            continue;
                        }
                        let levels: Levels = if ffr_slot {
                            [fcr_n, 0, down, up, buy, sell]
                        } else {
                            [fcr_n, up, down, 0, buy, sell]
                        };
                        let Some(a) = resolve(battery, cfg, state.soc_mwh, levels, duration_h)
                        else {
                            continue;
                        };
                        let revenue = IntervalRevenue::of(&a, prices, duration_h);
                        let value = revenue.net();
                        let replace = match &best {
                            None => true,
                            Some((best_levels, _, _, best_value)) => {
                                match compare_revenue(value, *best_value) {
                                    Ordering::Greater => true,
                                    Ordering::Equal => {
                                        tie_break(&levels, best_levels) == Ordering::Greater
                                    }
                                    Ordering::Less => false,
                                }
                            }
                        };
                        if replace {
                            best = Some((levels, a, revenue, value));
                        }
                    }
                }
            }
        }
    }
    // idle is always feasible from a valid SoC with non-negative backing
    let (_, a, revenue, _) = best.ok_or_else(|| {
        DispatchError::InfeasibleAllocation("no feasible allocation, not even idle".into())
    })?;
    Ok((a, revenue))
}

/// Advances the state of charge by the allocation's energy flows.
///
/// Results within numerical tolerance of a bound are snapped onto it; anything
/// further outside is an error, never clamped.
pub fn step_soc(
    battery: &BatterySpec,
    state: &SocState,
    allocation: &Allocation,
    duration_h: f64,
) -> Result<SocState, DispatchError> {
    check_soc(battery, state.soc_mwh)?;
    let tol = tolerance(battery);
    let a = allocation;
    if [
        a.spot_bought_mwh,
        a.spot_sold_mwh,
        a.activation_export_mwh,
        a.activation_import_mwh,
    ]
    .iter()
    .any(|v| !v.is_finite() || *v < 0.0)
    {
        return Err(DispatchError::InfeasibleAllocation(
            "energy flows must be finite and non-negative".into(),
        ));
    }
    if a.spot_bought_mwh > a.spot_buy_mw * duration_h + tol
        || a.spot_sold_mwh > a.spot_sell_mw * duration_h + tol
    {
        return Err(DispatchError::InfeasibleAllocation(
            "spot energy exceeds committed power".into(),
        ));
    }
    let cap = battery.energy_capacity_mwh();
    let next = soc_after(battery, state.soc_mwh, a);
    if next < -tol || next > cap + tol {
        return Err(DispatchError::InfeasibleAllocation(format!(
            "state of charge would reach {next} MWh, outside [0, {cap}]"
        )));
    }
    Ok(SocState {
        soc_mwh: next.clamp(0.0, cap),
        interval: state.interval + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn battery(eta: f64) -> BatterySpec {
        BatterySpec::new(1.0, 1.0, eta).unwrap()
    }

    fn at(soc: f64) -> SocState {
        SocState {
            soc_mwh: soc,
            interval: 0,
        }
    }

    #[test]
    fn zero_prices_idle() {
        let (a, r) = allocate_interval(
            &battery(0.9),
            &StrategyConfig::default(),
            &at(0.5),
            &IntervalPrices::default(),
            1.0,
        )
        .unwrap();
        assert!(a.is_idle());
        assert_eq!(r.net(), 0.0);
    }

    #[test]
    fn fcr_n_takes_full_power_at_half_charge() {
        let prices = IntervalPrices {
            fcr_n: 15.0,
            ..Default::default()
        };
        let (a, r) = allocate_interval(
            &battery(0.9),
            &StrategyConfig::default(),
            &at(0.5),
            &prices,
            1.0,
        )
        .unwrap();
        assert_eq!(a.fcr_n_mw, 1.0);
        assert_eq!(a.total_committed_mw(), 1.0);
        assert_eq!(r.net(), 15.0);
    }

    #[test]
    fn empty_battery_falls_back_to_fcr_d_down() {
        let prices = IntervalPrices {
            fcr_n: 15.0,
            fcr_d_down: 5.0,
            ..Default::default()
        };
        let (a, r) = allocate_interval(
            &battery(0.9),
            &StrategyConfig::default(),
            &at(0.0),
            &prices,
            1.0,
        )
        .unwrap();
        assert_eq!(a.fcr_n_mw, 0.0);
        assert_eq!(a.fcr_d_down_mw, 1.0);
        assert_eq!(r.net(), 5.0);
    }

    #[test]
    fn stacks_up_and_down_reserves() {
        let prices = IntervalPrices {
            fcr_d_up: 7.0,
            fcr_d_down: 4.0,
            ffr: 6.0,
            ..Default::default()
        };
        let (a, r) = allocate_interval(
            &battery(0.9),
            &StrategyConfig::default(),
            &at(0.5),
            &prices,
            1.0,
        )
        .unwrap();
        assert_eq!((a.fcr_d_up_mw, a.fcr_d_down_mw, a.ffr_mw), (1.0, 1.0, 0.0));
        assert_eq!(r.net(), 11.0);
    }

    #[test]
    fn equal_upward_prices_prefer_fcr_d_up() {
        let prices = IntervalPrices {
            fcr_d_up: 6.0,
            ffr: 6.0,
            ..Default::default()
        };
        let (a, _) = allocate_interval(
            &battery(0.9),
            &StrategyConfig::default(),
            &at(0.5),
            &prices,
            1.0,
        )
        .unwrap();
        assert_eq!((a.fcr_d_up_mw, a.ffr_mw), (1.0, 0.0));
    }

    #[test]
    fn sells_what_is_stored() {
        let b = battery(0.81);
        let prices = IntervalPrices {
            spot: 50.0,
            ..Default::default()
        };
        let (a, r) =
            allocate_interval(&b, &StrategyConfig::default(), &at(0.9), &prices, 1.0).unwrap();
        assert!((a.spot_sold_mwh - 0.81).abs() < 1e-12);
        assert!((r.net() - 40.5).abs() < 1e-9);
        let next = step_soc(&b, &at(0.9), &a, 1.0).unwrap();
        assert_eq!(next.soc_mwh, 0.0);
    }

    #[test]
    fn rejects_out_of_range_soc_and_bad_step() {
        let b = battery(0.9);
        assert!(matches!(
            allocate_interval(
                &b,
                &StrategyConfig::default(),
                &at(1.5),
                &IntervalPrices::default(),
                1.0
            ),
            Err(DispatchError::InfeasibleSoc { .. })
        ));
        let cfg = StrategyConfig {
            step_mw: 0.3,
            ..Default::default()
        };
        assert!(matches!(
            allocate_interval(&b, &cfg, &at(0.5), &IntervalPrices::default(), 1.0),
            Err(DispatchError::StepDoesNotDivide { .. })
        ));
    }

    #[test]
    fn charging_applies_charge_efficiency() {
        let b = battery(0.81);
        let a = Allocation {
            spot_buy_mw: 0.5,
            spot_bought_mwh: 0.5,
            ..Default::default()
        };
        let next = step_soc(&b, &at(0.5), &a, 1.0).unwrap();
        assert!((next.soc_mwh - 0.95).abs() < 1e-12);
        assert_eq!(next.interval, 1);
    }

    #[test]
    fn discharging_to_empty_is_fine_but_not_beyond() {
        let b = battery(1.0);
        let exact = Allocation {
            spot_sell_mw: 1.0,
            spot_sold_mwh: 0.3,
            ..Default::default()
        };
        assert_eq!(step_soc(&b, &at(0.3), &exact, 1.0).unwrap().soc_mwh, 0.0);
        let over = Allocation {
            spot_sell_mw: 1.0,
            spot_sold_mwh: 0.4,
            ..Default::default()
        };
        assert!(matches!(
            step_soc(&b, &at(0.3), &over, 1.0),
            Err(DispatchError::InfeasibleAllocation(_))
        ));
    }

    #[test]
    fn validator_rejects_overcommitment() {
        let b = battery(0.9);
        let cfg = StrategyConfig::default();
        let a = Allocation {
            fcr_n_mw: 0.75,
            fcr_d_up_mw: 0.5,
            ..Default::default()
        };
        assert!(check_allocation(&b, &cfg, 0.5, &a, 1.0).is_err());
        let both = Allocation {
            spot_buy_mw: 0.25,
            spot_sell_mw: 0.25,
            ..Default::default()
        };
        assert!(check_allocation(&b, &cfg, 0.5, &both, 1.0).is_err());
        let unbacked = Allocation {
            fcr_d_up_mw: 1.0,
            ..Default::default()
        };
        assert!(check_allocation(&b, &cfg, 0.25, &unbacked, 1.0).is_err());
        assert!(check_allocation(&b, &cfg, 0.5, &unbacked, 1.0).is_ok());
    }

    #[test]
    fn activation_moves_energy_and_settles_at_spot() {
        let b = battery(1.0);
        let cfg = StrategyConfig {
            activation_fraction: 0.1,
            ..Default::default()
        };
        let prices = IntervalPrices {
            fcr_d_up: 20.0,
            spot: 10.0,
            ..Default::default()
        };
        let (a, r) = allocate_interval(&b, &cfg, &at(0.6), &prices, 1.0).unwrap();
        assert_eq!(a.fcr_d_up_mw, 1.0);
        assert!((a.activation_export_mwh - 0.1).abs() < 1e-12);
        assert!((r.export - 1.0).abs() < 1e-9);
        assert!((r.net() - 21.0).abs() < 1e-9);
        let next = step_soc(&b, &at(0.6), &a, 1.0).unwrap();
        assert!(next.soc_mwh >= 0.5 - 1e-12);
    }
}
