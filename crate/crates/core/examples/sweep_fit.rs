//! Sweeps γ over [0.01, 0.1] for every built-in scheme, writes the CSV to
//! stdout and fits 1 - F = c γ² per scheme on stderr.

use adqec::experiments::{default_grid, fit_infidelity, sweep, write_csv, Scheme, SweepConfig};
use adqec::optimizer::SdpSettings;

fn main() -> adqec::error::Result<()> {
    let schemes = vec![Scheme::OptimizedSdp, Scheme::LeungSdp, Scheme::OptimizedAnalytical, Scheme::OptimizedFitted];
    let config = SweepConfig {
        grid: default_grid(),
        schemes: schemes.clone(),
        settings: SdpSettings::default(),
        custom_code: None,
    };
    let out = sweep(&config)?;
    write_csv(&out.records, std::io::stdout().lock())?;
    for s in schemes {
        let rows: Vec<_> = out.records.iter().filter(|r| r.scheme == s.name()).cloned().collect();
        let fit = fit_infidelity(&rows)?;
        eprintln!("{:>22}: c = {:.4} (rms misfit {:.1e})", s.name(), fit.coefficient, fit.residual);
    }
    Ok(())
}
