//! Prints the built-in emergency-braking scenario as JSON, ready to edit and
//! pass to `rou-falsify falsify --scenario`.
//!
//!     cargo run --example default_scenario > my_scenario.json

use rou_falsify::scenario::Scenario;

fn main() {
    println!("{}", Scenario::aebs_default().to_json());
}
