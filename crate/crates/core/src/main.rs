use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use lmcam::camera::Intrinsics;
use lmcam::datagen::{
    multishot_stitch, read_clip, read_masks, scale_color_augment, synthetic_pan, synthetic_zoom, write_clip,
    AugmentConfig, FrameSequence, MaskSequence, PanParams, ZoomParams, DEFAULT_K_MAX,
};
use lmcam::eval::{evaluate_all, Thresholds, VideoInput};
use lmcam::jsonio::{read_json, write_json};
use lmcam::landmarks::{
    condition_sequence, load_landmark_frames, load_landmark_template, save_landmark_frames, save_landmark_template,
    LandmarkTemplate3D, RasterStyle,
};
use lmcam::oracle::{animate, make_head, make_rig, render_motion, render_view, write_view, AnimatedScene, MotionSpec};
use lmcam::service::{serve, AppState};
use lmcam::trajectory::{
    canonical_trajectory, load_trajectory, sample, samples_to_csv, save_trajectory, CameraKeyframe, CanonicalMotion,
    MotionKind, DEFAULT_FRAMES,
};
use lmcam::{Error, Result};

const DEFAULT_FOV_DEG: f64 = 40.0;
const DEFAULT_DISTANCE: f64 = 6.0;
const DEFAULT_SIZE: u32 = 512;
const DEFAULT_FPS: f64 = 24.0;
const PROVENANCE: &str = "provenance.json";

#[derive(Parser)]
#[command(name = "lmcam", version, about = "Landmark-based camera control toolkit")]
struct Cli {
    /// Seed for stochastic commands.
    #[arg(long, global = true, env = "LMCAM_SEED")]
    seed: Option<u64>,
    /// TOML or JSON file with `style`, `thresholds`, `seed` and `log_level`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    log_level: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or sample camera trajectories.
    #[command(subcommand)]
    Trajectory(TrajectoryCmd),
    /// Render condition maps along a trajectory.
    Condition(ConditionArgs),
    /// Training-data augmentation ops.
    #[command(subcommand)]
    Datagen(DatagenCmd),
    /// Synthetic multi-view heads with exact ground truth.
    Oracle(OracleArgs),
    /// Label landmark videos and compute reference metrics.
    Eval(EvalArgs),
    /// Run the local HTTP service.
    Serve(ServeArgs),
}

#[derive(Args, Clone)]
struct BaseCamera {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    azimuth: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    elevation: f64,
    #[arg(long, default_value_t = DEFAULT_DISTANCE)]
    distance: f64,
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    fov: f64,
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    width: u32,
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    height: u32,
}

impl BaseCamera {
    fn keyframe(&self) -> Result<CameraKeyframe> {
        CameraKeyframe::orbit(self.azimuth, self.elevation, self.distance, self.fov, 0.0)
    }
}

#[derive(Subcommand)]
enum TrajectoryCmd {
    /// Write a canonical-motion trajectory.
    Gen {
        #[arg(long)]
        motion: String,
        /// Degrees for arcs, image fraction for pans, factor for zooms.
        #[arg(long)]
        magnitude: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_FRAMES)]
        frames: usize,
        #[command(flatten)]
        base: BaseCamera,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expand a trajectory into a per-frame pose CSV.
    Sample {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        frames: Option<usize>,
        /// CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConditionArgs {
    /// Template JSON; the built-in 68-point head when omitted.
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    frames: Option<usize>,
    /// Output size `WxH`, overriding the trajectory's.
    #[arg(long, value_parser = parse_size)]
    size: Option<(u32, u32)>,
    #[arg(long, default_value_t = DEFAULT_FPS)]
    fps: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum DatagenCmd {
    /// Per-clip rescale and shared random background.
    Augment {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Foreground masks; all-foreground when omitted.
        #[arg(long)]
        source_masks: Option<PathBuf>,
        #[arg(long)]
        target_masks: Option<PathBuf>,
        /// Crop or pad back to the input size.
        #[arg(long)]
        restore_size: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Linear zoom schedule; seeded when the factors are omitted.
    Zoom {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, requires = "s_end")]
        s_start: Option<f64>,
        #[arg(long, requires = "s_start")]
        s_end: Option<f64>,
        #[arg(long, value_parser = parse_rgb, default_value = "0,0,0")]
        fill: [u8; 3],
        #[arg(long)]
        out: PathBuf,
    },
    /// Linear pan; seeded when the offsets are omitted.
    Pan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_pair, requires = "o_end", allow_hyphen_values = true)]
        o_start: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_pair, requires = "o_start", allow_hyphen_values = true)]
        o_end: Option<[f64; 2]>,
        /// Offset bounds in pixels; 15% of the frame size when omitted.
        #[arg(long, value_parser = parse_pair)]
        bounds: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_rgb, default_value = "0,0,0")]
        fill: [u8; 3],
        #[arg(long)]
        out: PathBuf,
    },
    /// Concatenate random segments of distinct clips.
    Stitch {
        #[arg(long, num_args = 1.., required = true)]
        clips: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 68)]
    landmarks: usize,
    #[arg(long, default_value_t = DEFAULT_FRAMES)]
    frames: usize,
    /// Rig views of the animated head; 0 skips the rig.
    #[arg(long, default_value_t = lmcam::oracle::RIG_CAMERAS)]
    views: usize,
    /// Canonical motions to render; all ten when omitted.
    #[arg(long, value_delimiter = ',')]
    motions: Option<Vec<String>>,
    #[arg(long, default_value_t = 20.0)]
    yaw_amp: f64,
    #[arg(long, default_value_t = 0.0)]
    pitch_amp: f64,
    #[arg(long, default_value_t = 0.0)]
    jaw_amp: f64,
    #[command(flatten)]
    base: BaseCamera,
    #[arg(long, default_value_t = DEFAULT_FPS)]
    fps: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// A video directory with `landmarks.json`, or a directory of them.
    #[arg(long)]
    videos: PathBuf,
    /// Reference clip directory (or directory of them, matched by name).
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Intended motion; taken from the directory name when omitted.
    #[arg(long)]
    motion: Option<String>,
    #[arg(long)]
    template: Option<PathBuf>,
    /// Horizontal field of view assumed for the landmark videos.
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    fov: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Template registered under its file stem as a `template_ref`.
    #[arg(long)]
    template: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    style: RasterStyle,
    thresholds: Thresholds,
    seed: Option<u64>,
    log_level: Option<String>,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let cfg: RunConfig = if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            read_json(path).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.style.validate()?;
        cfg.thresholds.validate()?;
        Ok(cfg)
    }
}

struct Ctx {
    seed: Option<u64>,
    config: RunConfig,
}

impl Ctx {
    fn seed(&self, what: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config(format!("{what} needs a seed (--seed, LMCAM_SEED or config)")))
    }

    fn provenance(&self, dir: &Path, op: serde_json::Value) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(
            &dir.join(PROVENANCE),
            &serde_json::json!({
                "version": env!("CARGO_PKG_VERSION"),
                "argv": std::env::args().collect::<Vec<_>>(),
                "seed": self.seed,
                "config": self.config,
                "op": op,
            }),
        )
    }
}

fn parse_size(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    Ok((w.parse().map_err(|e| format!("{e}"))?, h.parse().map_err(|e| format!("{e}"))?))
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    Ok([a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?])
}

fn parse_rgb(s: &str) -> std::result::Result<[u8; 3], String> {
    let v: Vec<u8> = s.split(',').map(|c| c.trim().parse::<u8>()).collect::<std::result::Result<_, _>>().map_err(|e| format!("{e}"))?;
    v.try_into().map_err(|_| "expected r,g,b".to_string())
}

fn template_or_builtin(path: Option<&Path>) -> Result<LandmarkTemplate3D> {
    path.map_or_else(|| Ok(LandmarkTemplate3D::builtin()), load_landmark_template)
}

fn masks_or_full(dir: Option<&Path>, seq: &FrameSequence) -> Result<MaskSequence> {
    let (w, h) = seq.dimensions();
    dir.map_or_else(|| Ok(MaskSequence::uniform(seq.len(), w, h, true)), |d| read_masks(d, seq.len()))
}

fn cmd_trajectory(cmd: TrajectoryCmd) -> Result<()> {
    match cmd {
        TrajectoryCmd::Gen { motion, magnitude, frames, base, out } => {
            let kind: MotionKind = motion.parse()?;
            let m = match magnitude {
                Some(v) => CanonicalMotion::new(kind, v)?,
                None => CanonicalMotion::with_default_magnitude(kind),
            };
            let traj = canonical_trajectory(&m, &base.keyframe()?, base.width, base.height, frames)?;
            save_trajectory(&out, &traj)
        }
        TrajectoryCmd::Sample { trajectory, frames, out } => {
            let traj = load_trajectory(&trajectory)?;
            let csv = samples_to_csv(&sample(&traj, frames.unwrap_or(traj.frames))?);
            match out {
                Some(p) => std::fs::write(&p, csv).map_err(|e| Error::io(p, e)),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

fn cmd_condition(ctx: &Ctx, a: ConditionArgs) -> Result<()> {
    let template = template_or_builtin(a.template.as_deref())?;
    let mut traj = load_trajectory(&a.trajectory)?;
    if let Some((w, h)) = a.size {
        traj.width = w;
        traj.height = h;
        traj.validate()?;
    }
    let frames = a.frames.unwrap_or(traj.frames);
    let style = ctx.config.style.clone().bind(&template);
    let seq = condition_sequence(&template, &traj, frames, &style)?;
    let clip = FrameSequence::new(seq.maps.iter().map(|m| m.to_image()).collect(), a.fps)?;
    write_clip(&a.out, &clip)?;
    save_landmark_frames(&a.out.join("landmarks.json"), &seq.landmarks, template.ids(), traj.width, traj.height)?;
    ctx.provenance(
        &a.out,
        serde_json::json!({
            "op": "condition",
            "template": a.template,
            "trajectory": a.trajectory,
            "frames": frames,
            "size": [traj.width, traj.height],
            "fps": a.fps,
        }),
    )
}

fn cmd_datagen(ctx: &Ctx, cmd: DatagenCmd) -> Result<()> {
    match cmd {
        DatagenCmd::Augment { source, target, source_masks, target_masks, restore_size, out } => {
            let seed = ctx.seed("datagen augment")?;
            let (src, tgt) = (read_clip(&source)?, read_clip(&target)?);
            let sm = masks_or_full(source_masks.as_deref(), &src)?;
            let tm = masks_or_full(target_masks.as_deref(), &tgt)?;
            let r = scale_color_augment(&src, &tgt, &sm, &tm, seed, &AugmentConfig { restore_size })?;
            write_clip(&out.join("source"), &r.source)?;
            write_clip(&out.join("target"), &r.target)?;
            ctx.provenance(&out, serde_json::to_value(&r.provenance).expect("provenance serializes"))
        }
        DatagenCmd::Zoom { input, s_start, s_end, fill, out } => {
            let params = match (s_start, s_end) {
                (Some(s_start), Some(s_end)) => ZoomParams::Fixed { s_start, s_end },
                _ => ZoomParams::Seeded(ctx.seed("seeded datagen zoom")?),
            };
            let (seq, prov) = synthetic_zoom(&read_clip(&input)?, params, fill)?;
            write_clip(&out, &seq)?;
            ctx.provenance(&out, serde_json::to_value(&prov).expect("provenance serializes"))
        }
        DatagenCmd::Pan { input, o_start, o_end, bounds, fill, out } => {
            let params = match (o_start, o_end) {
                (Some(o_start), Some(o_end)) => PanParams::Fixed { o_start, o_end },
                _ => PanParams::Seeded(ctx.seed("seeded datagen pan")?),
            };
            let (seq, prov) = synthetic_pan(&read_clip(&input)?, params, bounds, fill)?;
            write_clip(&out, &seq)?;
            ctx.provenance(&out, serde_json::to_value(&prov).expect("provenance serializes"))
        }
        DatagenCmd::Stitch { clips, k_max, out } => {
            let seed = ctx.seed("datagen stitch")?;
            let seqs = clips.iter().map(|c| read_clip(c)).collect::<Result<Vec<_>>>()?;
            let r = multishot_stitch(&seqs, seed, k_max)?;
            write_clip(&out, &r.sequence)?;
            ctx.provenance(
                &out,
                serde_json::json!({ "clips": clips, "stitch": serde_json::to_value(&r.provenance).expect("provenance serializes") }),
            )
        }
    }
}

fn cmd_oracle(ctx: &Ctx, a: OracleArgs) -> Result<()> {
    let seed = ctx.seed("oracle")?;
    let head = make_head(seed, a.landmarks)?;
    save_landmark_template(&a.out.join("template.json"), &head.template)?;
    let style = ctx.config.style.clone().bind(&head.template);
    let k = Intrinsics::from_fov(a.base.fov, a.base.width, a.base.height)?;

    if a.views > 0 {
        let motion = MotionSpec {
            yaw_amp_deg: a.yaw_amp,
            pitch_amp_deg: a.pitch_amp,
            jaw_amp: a.jaw_amp,
            ..Default::default()
        };
        let scene = animate(&head, a.frames, &motion, seed)?;
        let rig = make_rig(a.views, a.base.distance, a.base.elevation, k)?;
        write_json(&a.out.join("rig.json"), &rig)?;
        for (j, cam) in rig.cameras.iter().enumerate() {
            let view = render_view(&scene, (cam.pose, cam.intrinsics), &style)?;
            write_view(&a.out.join("rig").join(format!("view_{j:02}")), &scene, &view, a.fps)?;
        }
    }

    let kinds = match &a.motions {
        Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<MotionKind>>>()?,
        None => MotionKind::ALL.to_vec(),
    };
    let still = AnimatedScene::static_scene(head.clone(), 1);
    let base = a.base.keyframe()?;
    for kind in &kinds {
        let m = CanonicalMotion::with_default_magnitude(*kind);
        let (traj, view) = render_motion(&still, &m, &base, a.base.width, a.base.height, a.frames, &style)?;
        let dir = a.out.join("motions").join(kind.name());
        write_view(&dir, &still, &view, a.fps)?;
        save_trajectory(&dir.join("trajectory.json"), &traj)?;
    }
    ctx.provenance(
        &a.out,
        serde_json::json!({
            "op": "oracle",
            "landmarks": a.landmarks,
            "frames": a.frames,
            "views": a.views,
            "motions": kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
        }),
    )
}

fn video_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join("landmarks.json").exists() {
        return Ok(vec![root.to_path_buf()]);
    }
    let rd = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("landmarks.json").exists())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::schema(format!("{}: no landmarks.json found", root.display())));
    }
    Ok(dirs)
}

fn dir_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn cmd_eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let template = template_or_builtin(a.template.as_deref())?;
    let dirs = video_dirs(&a.videos)?;
    let single = dirs.len() == 1 && dirs[0] == a.videos;
    let override_motion = a.motion.as_deref().map(str::parse::<MotionKind>).transpose()?;
    let mut size = None;
    let mut inputs = Vec::with_capacity(dirs.len());
    for d in &dirs {
        let name = dir_name(d);
        let (file, landmarks) = load_landmark_frames(&d.join("landmarks.json"))?;
        match size {
            None => size = Some((file.width, file.height)),
            Some(s) if s != (file.width, file.height) => {
                return Err(Error::DimensionMismatch(format!("{name}: landmark frame size differs")));
            }
            Some(_) => {}
        }
        let intended = override_motion.or_else(|| name.parse().ok());
        if intended.is_none() {
            log::warn!("{name}: no intended motion; reporting delta only");
        }
        let reference = match &a.reference {
            Some(r) if single => Some(read_clip(r)?),
            Some(r) => Some(read_clip(&r.join(&name))?),
            None => None,
        };
        let generated = if reference.is_some() { Some(read_clip(d)?) } else { None };
        inputs.push(VideoInput { name, intended, landmarks, generated, reference });
    }
    let (w, h) = size.expect("at least one video");
    let k = Intrinsics::from_fov(a.fov, w, h)?;
    let report = evaluate_all(&inputs, &template, &k, &ctx.config.thresholds)?;
    if let Some(p) = report.aggregate.camera_correctness_pct {
        log::info!("camera correctness {p:.2}% over {} labeled videos", report.aggregate.labeled);
    }
    write_json(&a.out, &report)
}

fn cmd_serve(ctx: &Ctx, a: ServeArgs) -> Result<()> {
    let mut state = AppState::new(ctx.config.style.clone());
    for t in &a.template {
        let name = t.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        state = state.with_template(name, load_landmark_template(t)?);
    }
    serve(SocketAddr::new(a.bind, a.port), state, a.static_dir)
}

fn run(cli: Cli) -> Result<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let level = cli.log_level.clone().or_else(|| config.log_level.clone()).unwrap_or_else(|| "warn".into());
    env_logger::Builder::new().parse_filters(&level).try_init().ok();
    let ctx = Ctx { seed: cli.seed.or(config.seed), config };
    match cli.command {
        Command::Trajectory(c) => cmd_trajectory(c),
        Command::Condition(a) => cmd_condition(&ctx, a),
        Command::Datagen(c) => cmd_datagen(&ctx, c),
        Command::Oracle(a) => cmd_oracle(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Serve(a) => cmd_serve(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
