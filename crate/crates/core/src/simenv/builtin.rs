use std::sync::{Arc, OnceLock};

use super::site::Site;
use super::task::{generate_suite_from, SuiteError, TaskSpec};

const MAP: &str = include_str!("../../sites/map.json");
const SHOP: &str = include_str!("../../sites/shop.json");
const FORUM: &str = include_str!("../../sites/forum.json");

/// The shipped sites, in catalogue order: map, shop, forum.
pub fn builtin_sites() -> &'static [Arc<Site>] {
    static SITES: OnceLock<Vec<Arc<Site>>> = OnceLock::new();
    SITES.get_or_init(|| {
        [MAP, SHOP, FORUM]
            .into_iter()
            .map(|text| Arc::new(Site::from_json(text).expect("built-in site is valid")))
            .collect()
    })
}

pub fn builtin_site(name: &str) -> Option<Arc<Site>> {
    builtin_sites().iter().find(|s| s.name == name).cloned()
}

/// [`generate_suite_from`] over the built-in catalogue.
pub fn generate_suite(seed: u64, k: usize, n: usize) -> Result<Vec<TaskSpec>, SuiteError> {
    let sites: Vec<Site> = builtin_sites().iter().map(|s| (**s).clone()).collect();
    generate_suite_from(&sites, seed, k, n)
}
