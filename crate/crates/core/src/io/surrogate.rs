use std::path::Path;

use super::wire::{Reader, Writer};
use super::{read_file, write_atomic};
use crate::error::{Result, RomError};
use crate::gpr::{GprModel, KernelFamily, KernelSpec, Standardizer};
use crate::linalg::PodBasis;
use crate::nn::{Activation, CaeNetwork, LayerKind, LayerSpec};
use crate::rom::{
    CaeGpr, Method, PodGpr, Provenance, RomModel, RomSurrogate, ScalingInfo, ScalingMode,
};

pub const SURROGATE_MAGIC: &[u8; 8] = b"ROMSURR1";

// Layout: magic, u8 kind, u64 seed, 32-byte config digest, f64 wall time,
// u64 epochs, u32 n_y, u32 n_x, then the kind-specific body.

fn put_gpr(w: &mut Writer, m: &GprModel) -> Result<()> {
    let st = m.standardizer();
    w.vec(st.mean())?;
    w.vec(st.std())?;
    w.len(m.inputs().len())?;
    w.len(m.input_dim())?;
    for z in m.inputs() {
        w.f64s(z);
    }
    w.f64(m.y_mean());
    w.vec(m.alpha())?;
    w.matrix(m.chol())?;
    let k = m.kernel();
    w.u8(match k.family() {
        KernelFamily::Matern => 0,
        KernelFamily::Rbf => 1,
    });
    w.f64(k.length_scale());
    w.f64(k.nu());
    w.f64(m.noise());
    w.u8(m.jittered() as u8);
    w.f64(m.log_likelihood());
    Ok(())
}

fn get_gpr(r: &mut Reader) -> Result<GprModel> {
    let standardizer = Standardizer::from_parts(r.vec()?, r.vec()?).map_err(format_err)?;
    let n = r.len()?;
    let p = r.len()?;
    let inputs = (0..n).map(|_| r.f64s(p)).collect::<Result<Vec<_>>>()?;
    let y_mean = r.f64()?;
    let alpha = r.vec()?;
    let chol = r.matrix()?;
    let family = match r.u8()? {
        0 => KernelFamily::Matern,
        1 => KernelFamily::Rbf,
        t => return Err(RomError::Format(format!("unknown kernel family tag {t}"))),
    };
    let length_scale = r.f64()?;
    let nu = r.f64()?;
    let kernel = KernelSpec::new(family, length_scale, nu).map_err(format_err)?;
    let noise = r.f64()?;
    let jittered = r.u8()? != 0;
    let log_likelihood = r.f64()?;
    GprModel::from_parts(
        standardizer,
        inputs,
        y_mean,
        alpha,
        chol,
        kernel,
        noise,
        jittered,
        log_likelihood,
    )
}

fn put_models(w: &mut Writer, models: &[GprModel]) -> Result<()> {
    w.len(models.len())?;
    models.iter().try_for_each(|m| put_gpr(w, m))
}

fn get_models(r: &mut Reader) -> Result<Vec<GprModel>> {
    let k = r.len()?;
    (0..k).map(|_| get_gpr(r)).collect()
}

fn format_err(e: RomError) -> RomError {
    match e {
        RomError::Argument(m) | RomError::InvalidData(m) => RomError::Format(m),
        other => other,
    }
}

fn kind_tag(k: LayerKind) -> u8 {
    match k {
        LayerKind::Conv => 0,
        LayerKind::ConvTranspose => 1,
        LayerKind::MaxPool => 2,
        LayerKind::Dense => 3,
        LayerKind::Reshape => 4,
        LayerKind::Activation => 5,
    }
}

fn kind_from_tag(t: u8) -> Result<LayerKind> {
    Ok(match t {
        0 => LayerKind::Conv,
        1 => LayerKind::ConvTranspose,
        2 => LayerKind::MaxPool,
        3 => LayerKind::Dense,
        4 => LayerKind::Reshape,
        5 => LayerKind::Activation,
        t => return Err(RomError::Format(format!("unknown layer kind tag {t}"))),
    })
}

fn put_specs(w: &mut Writer, specs: &[LayerSpec]) -> Result<()> {
    w.len(specs.len())?;
    for s in specs {
        w.u8(kind_tag(s.kind));
        for v in [s.units, s.kernel.0, s.kernel.1, s.stride.0, s.stride.1] {
            w.len(v)?;
        }
        let (tag, slope) = match s.activation {
            Activation::Identity => (0, 0.0),
            Activation::LeakyRelu(a) => (1, a),
            Activation::Sigmoid => (2, 0.0),
        };
        w.u8(tag);
        w.f64(slope);
        for v in s.target {
            w.len(v)?;
        }
    }
    Ok(())
}

fn get_specs(r: &mut Reader) -> Result<Vec<LayerSpec>> {
    let n = r.len()?;
    (0..n)
        .map(|_| {
            let kind = kind_from_tag(r.u8()?)?;
            let units = r.len()?;
            let kernel = (r.len()?, r.len()?);
            let stride = (r.len()?, r.len()?);
            let tag = r.u8()?;
            let slope = r.f64()?;
            let activation = match tag {
                0 => Activation::Identity,
                1 => Activation::LeakyRelu(slope),
                2 => Activation::Sigmoid,
                t => return Err(RomError::Format(format!("unknown activation tag {t}"))),
            };
            let target = [r.len()?, r.len()?, r.len()?];
            Ok(LayerSpec {
                kind,
                units,
                kernel,
                stride,
                activation,
                target,
            })
        })
        .collect()
}

fn put_scaling(w: &mut Writer, s: &ScalingInfo) -> Result<()> {
    w.u8(match s.mode() {
        ScalingMode::ChannelGlobal => 0,
        ScalingMode::PerFeature => 1,
    });
    w.vec(s.min())?;
    w.vec(s.max())
}

fn get_scaling(r: &mut Reader) -> Result<ScalingInfo> {
    let mode = match r.u8()? {
        0 => ScalingMode::ChannelGlobal,
        1 => ScalingMode::PerFeature,
        t => return Err(RomError::Format(format!("unknown scaling mode tag {t}"))),
    };
    ScalingInfo::from_parts(mode, r.vec()?, r.vec()?)
}

pub fn encode_surrogate(s: &RomSurrogate) -> Result<Vec<u8>> {
    let mut w = Writer::default();
    w.bytes(SURROGATE_MAGIC);
    w.u8(s.method().tag());
    let prov = s.provenance();
    w.u64(prov.seed);
    w.bytes(&prov.config_digest);
    w.f64(prov.wall_time_s);
    w.u64(prov.epochs);
    let (ny, nx) = s.grid();
    w.len(ny)?;
    w.len(nx)?;
    match s.model() {
        RomModel::PodGpr(per) => {
            w.len(per.len())?;
            for m in per {
                w.matrix(m.basis().vectors())?;
                w.vec(m.basis().singular_values())?;
                put_models(&mut w, m.models())?;
            }
        }
        RomModel::CaeGpr(c) => {
            let net = c.network();
            for v in net.input_shape() {
                w.len(v)?;
            }
            put_specs(&mut w, net.encoder().specs())?;
            put_specs(&mut w, net.decoder().specs())?;
            w.vec(&net.params())?;
            w.len(c.scaling().len())?;
            for info in c.scaling() {
                put_scaling(&mut w, info)?;
            }
            w.u64(c.epochs() as u64);
            put_models(&mut w, c.models())?;
        }
    }
    Ok(w.buf)
}

pub fn decode_surrogate(bytes: &[u8]) -> Result<RomSurrogate> {
    let mut r = Reader::new(bytes, "surrogate file");
    if r.bytes(8).ok() != Some(SURROGATE_MAGIC.as_slice()) {
        return Err(RomError::Format("not a surrogate file (bad magic)".into()));
    }
    let method = Method::from_tag(r.u8()?)?;
    let seed = r.u64()?;
    let config_digest: [u8; 32] = r.bytes(32)?.try_into().expect("32 bytes");
    let wall_time_s = r.f64()?;
    let epochs = r.u64()?;
    let ny = r.len()?;
    let nx = r.len()?;
    let model = match method {
        Method::PodGpr => {
            let c = r.len()?;
            let per = (0..c)
                .map(|_| {
                    let basis = PodBasis::from_parts(r.matrix()?, r.vec()?).map_err(format_err)?;
                    PodGpr::from_parts(basis, get_models(&mut r)?)
                })
                .collect::<Result<Vec<_>>>()?;
            RomModel::PodGpr(per)
        }
        Method::CaeGpr => {
            let shape = [r.len()?, r.len()?, r.len()?];
            let enc = get_specs(&mut r)?;
            let dec = get_specs(&mut r)?;
            let mut net = CaeNetwork::new(shape, enc, dec).map_err(format_err)?;
            net.set_params(&r.vec()?).map_err(format_err)?;
            let c = r.len()?;
            let scaling = (0..c)
                .map(|_| get_scaling(&mut r))
                .collect::<Result<Vec<_>>>()?;
            let cae_epochs = r.u64()? as usize;
            let models = get_models(&mut r)?;
            RomModel::CaeGpr(CaeGpr::from_parts(
                net, scaling, ny, nx, models, cae_epochs,
            )?)
        }
    };
    r.finish()?;
    let provenance = Provenance {
        seed,
        config_digest,
        wall_time_s,
        epochs,
    };
    RomSurrogate::new(model, ny, nx, provenance).map_err(format_err)
}

pub fn save_surrogate(path: &Path, s: &RomSurrogate) -> Result<()> {
    write_atomic(path, &encode_surrogate(s)?)
}

pub fn load_surrogate(path: &Path) -> Result<RomSurrogate> {
    decode_surrogate(&read_file(path)?)
}
