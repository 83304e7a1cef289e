//! The product caloron correspondence: a connection on `M x X` against a
//! gauge-group connection and Higgs field on `M`, in sampled-form and link
//! form, with the bidegree split of curvature.

mod curvature;
mod links;
mod pair;

pub use curvature::{curvature, curvature_split, curvature_split_links, nabla_phi, CurvatureTriple};
pub use links::{link_forward, link_inverse, LinkPair};
pub use pair::{
    forward_transform, higgs_gauge_action, inverse_transform, CaloronPair, FiberGauge, GaugeGroupConnection,
    HiggsFieldMap, ProductConnection,
};
