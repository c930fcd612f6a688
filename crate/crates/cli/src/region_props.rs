use clap::Args;
use serde::Serialize;

use bayesreg::region::{lambda_crit, mrse_asymptotic, region_props, size_of_lambda};
use bayesreg::{FisherMatrix, LambdaCrit, ParamSpace, RegionProps, RegionSpec, SCHEMA_VERSION};

use crate::{CliError, CliResult};

#[derive(Args)]
#[command(group = clap::ArgGroup::new("constraint").args(["lambda", "c", "s"]))]
pub struct RegionPropsArgs {
    /// Parameter dimension.
    #[arg(long)]
    d: usize,
    /// Fisher matrix, d*d entries in row-major order separated by commas or spaces.
    #[arg(long, allow_hyphen_values = true)]
    fisher: String,
    /// Volume of the parameter box.
    #[arg(long, default_value_t = 1.0)]
    volume: f64,
    /// Likelihood-ratio level λ in (0, 1].
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixed credibility in (0, 1).
    #[arg(long)]
    c: Option<f64>,
    /// Fixed size in (0, 1].
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    schema_version: &'static str,
    d: usize,
    volume: f64,
    fisher: FisherMatrix,
    det: f64,
    lambda_crit: LambdaCrit,
    constraint: String,
    region: RegionProps,
    /// Asymptotic MRSE of the reported region.
    mrse: f64,
}

fn parse_entries(text: &str) -> CliResult<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("malformed Fisher entry '{t}'")))
        })
        .collect()
}

pub fn run(args: &RegionPropsArgs) -> CliResult<()> {
    if args.d == 0 {
        return Err(CliError::Usage("--d must be at least 1".into()));
    }
    let entries = parse_entries(&args.fisher)?;
    if entries.len() != args.d * args.d {
        return Err(CliError::Usage(format!(
            "--fisher needs {} entries for d = {}, got {}",
            args.d * args.d,
            args.d,
            entries.len()
        )));
    }
    let fisher = FisherMatrix::from_row_slice(args.d, &entries)?;
    let space = ParamSpace::with_volume(args.d, args.volume)?;
    let lc = lambda_crit(&fisher, &space)?;
    let (constraint, region) = match (args.lambda, args.c, args.s) {
        (Some(lambda), _, _) => ("lambda".to_string(), size_of_lambda(lambda, &fisher, &space)?),
        (_, Some(c0), _) => {
            let spec = RegionSpec::FixedC { c0 };
            (spec.label().to_string(), region_props(&spec, &fisher, &space)?)
        }
        (_, _, Some(s0)) => {
            let spec = RegionSpec::FixedS { s0 };
            (spec.label().to_string(), region_props(&spec, &fisher, &space)?)
        }
        _ => {
            let spec = RegionSpec::Plausible;
            (spec.label().to_string(), region_props(&spec, &fisher, &space)?)
        }
    };
    let mrse = mrse_asymptotic(region.lambda.min(1.0), &fisher)?;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        d: args.d,
        volume: args.volume,
        det: fisher.det(),
        fisher,
        lambda_crit: lc,
        constraint,
        region,
        mrse,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failure(e.to_string()))?;
    println!("{json}");
    Ok(())
}
