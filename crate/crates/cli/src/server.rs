//! JSON play service. The bot always holds X and the human O.
//!
//! Sessions live in memory. Each one sits behind its own mutex; a request
//! that finds it held gets 409 instead of waiting, so two concurrent moves
//! on one game yield one success and one conflict.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, TryLockError};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tictac_core::{Cell, GameContext, Outcome, Policy, PolicyMode, Reason, T3dt};
use uuid::Uuid;

use crate::play::{BOT, HUMAN};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstPlayer {
    Bot,
    Human,
}

#[derive(Debug, Deserialize)]
pub struct CreateGame {
    pub first_player: FirstPlayer,
    #[serde(default)]
    pub mode: Option<PolicyMode>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct MoveRequest {
    pub cell: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BotMove {
    pub cell: u8,
    pub rule: Reason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveView {
    pub ply: usize,
    pub mark: String,
    pub cell: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<Reason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameView {
    pub game_id: Uuid,
    pub board: String,
    pub status: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bot_move: Option<BotMove>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub game_id: Uuid,
    pub board: String,
    pub status: Outcome,
    pub first_player: FirstPlayer,
    pub mode: PolicyMode,
    pub seed: u64,
    pub bot_mark: String,
    pub human_mark: String,
    pub moves: Vec<MoveView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_bot_move: Option<BotMove>,
}

#[derive(Debug)]
pub struct GameSession {
    pub id: Uuid,
    pub context: GameContext,
    pub mode: PolicyMode,
    pub seed: u64,
    first_player: FirstPlayer,
    rng: ChaCha8Rng,
    rules: Vec<Option<Reason>>,
    last_bot_move: Option<BotMove>,
    last_active: Instant,
}

impl GameSession {
    fn new(id: Uuid, first_player: FirstPlayer, mode: PolicyMode, seed: u64) -> GameSession {
        GameSession {
            id,
            context: GameContext::new(BOT, first_player == FirstPlayer::Bot),
            mode,
            seed,
            first_player,
            rng: ChaCha8Rng::seed_from_u64(seed),
            rules: Vec::new(),
            last_bot_move: None,
            last_active: Instant::now(),
        }
    }

    pub fn status(&self) -> Outcome {
        self.context.board().outcome()
    }

    /// Plays the bot's move if it is the bot's turn in an ongoing game.
    fn bot_turn(&mut self) -> Result<Option<BotMove>, ApiError> {
        if self.status().is_terminal() || !self.context.is_bot_turn() {
            return Ok(None);
        }
        let (cell, rule) = T3dt::new(self.mode)
            .choose(&self.context, &mut self.rng)
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        self.context = self
            .context
            .play(cell)
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        self.rules.push(Some(rule));
        let mv = BotMove {
            cell: cell.index() as u8,
            rule,
        };
        self.last_bot_move = Some(mv);
        Ok(Some(mv))
    }

    fn human_move(&mut self, cell: i64) -> Result<Option<BotMove>, ApiError> {
        if self.status().is_terminal() {
            return Err(ApiError::Conflict(format!(
                "game is over: {}",
                self.status()
            )));
        }
        let cell = usize::try_from(cell)
            .ok()
            .and_then(|c| Cell::new(c).ok())
            .ok_or_else(|| {
                ApiError::Conflict(format!("illegal move: cell {cell} is not in 0..8"))
            })?;
        self.context = self
            .context
            .play(cell)
            .map_err(|e| ApiError::Conflict(format!("illegal move: {e}")))?;
        self.rules.push(None);
        self.bot_turn()
    }

    fn view(&self, bot_move: Option<BotMove>) -> GameView {
        GameView {
            game_id: self.id,
            board: self.context.board().to_string(),
            status: self.status(),
            bot_move,
        }
    }

    pub fn session_view(&self) -> SessionView {
        let moves = self
            .context
            .history()
            .zip(&self.rules)
            .enumerate()
            .map(|(i, ((cell, mark), rule))| MoveView {
                ply: i + 1,
                mark: mark.to_string(),
                cell: cell.index() as u8,
                rule: *rule,
            })
            .collect();
        SessionView {
            game_id: self.id,
            board: self.context.board().to_string(),
            status: self.status(),
            first_player: self.first_player,
            mode: self.mode,
            seed: self.seed,
            bot_mark: BOT.to_string(),
            human_mark: HUMAN.to_string(),
            moves,
            last_bot_move: self.last_bot_move,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown game {0}")]
    NotFound(Uuid),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (
            status,
            Json(serde_json::json!({ "error": self.to_string() })),
        )
            .into_response()
    }
}

type Shared = Arc<Mutex<GameSession>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<Uuid, Shared>>>,
    seeds: Arc<Mutex<ChaCha8Rng>>,
    idle_timeout: Duration,
}

impl AppState {
    /// `seed` drives the seeds handed to games created without one.
    pub fn new(seed: u64, idle_timeout: Duration) -> AppState {
        AppState {
            sessions: Arc::default(),
            seeds: Arc::new(Mutex::new(ChaCha8Rng::seed_from_u64(seed))),
            idle_timeout,
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, id: Uuid) -> Result<Shared, ApiError> {
        self.sessions
            .lock()
            .expect("session map")
            .get(&id)
            .cloned()
            .ok_or(ApiError::NotFound(id))
    }

    /// Drops sessions idle for longer than the timeout as of `now`. Sessions
    /// busy with a request are kept. Returns how many were dropped.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let mut sessions = self.sessions.lock().expect("session map");
        let before = sessions.len();
        sessions.retain(|_, s| match s.try_lock() {
            Ok(s) => now.saturating_duration_since(s.last_active) <= self.idle_timeout,
            Err(_) => true,
        });
        before - sessions.len()
    }
}

fn lock(session: &Shared) -> Result<std::sync::MutexGuard<'_, GameSession>, ApiError> {
    match session.try_lock() {
        Ok(guard) => Ok(guard),
        Err(TryLockError::WouldBlock) => Err(ApiError::Conflict(
            "another move on this game is in progress".into(),
        )),
        Err(TryLockError::Poisoned(_)) => {
            Err(ApiError::Internal("session state is corrupt".into()))
        }
    }
}

async fn create_game(
    State(state): State<AppState>,
    Json(req): Json<CreateGame>,
) -> Result<(StatusCode, Json<GameView>), ApiError> {
    let seed = req
        .seed
        .unwrap_or_else(|| rand::Rng::gen(&mut *state.seeds.lock().expect("seed source")));
    let id = Uuid::new_v4();
    let mut session = GameSession::new(id, req.first_player, req.mode.unwrap_or_default(), seed);
    let bot_move = session.bot_turn()?;
    let view = session.view(bot_move);
    state
        .sessions
        .lock()
        .expect("session map")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn play_move(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
    Json(req): Json<MoveRequest>,
) -> Result<Json<GameView>, ApiError> {
    let shared = state.get(id)?;
    let mut session = lock(&shared)?;
    session.last_active = Instant::now();
    let bot_move = session.human_move(req.cell)?;
    Ok(Json(session.view(bot_move)))
}

async fn show_game(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
) -> Result<Json<SessionView>, ApiError> {
    let shared = state.get(id)?;
    let mut session = lock(&shared)?;
    session.last_active = Instant::now();
    Ok(Json(session.session_view()))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/games", post(create_game))
        .route("/api/games/{id}/moves", post(play_move))
        .route("/api/games/{id}", get(show_game))
        .with_state(state)
}

/// Serves until ctrl-c. Benchmarks in this process refuse to run meanwhile.
pub async fn serve(port: u16, seed: u64, idle_timeout: Duration) -> std::io::Result<()> {
    let _guard = tictac_core::bench::ServingGuard::acquire();
    let state = AppState::new(seed, idle_timeout);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60).min(idle_timeout));
        loop {
            tick.tick().await;
            sweeper.evict_idle(Instant::now());
        }
    });
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eviction_respects_the_timeout() {
        let state = AppState::new(0, Duration::from_secs(10));
        let id = Uuid::new_v4();
        let session = GameSession::new(id, FirstPlayer::Human, PolicyMode::Safe, 1);
        let created = session.last_active;
        state
            .sessions
            .lock()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(session)));
        assert_eq!(state.evict_idle(created + Duration::from_secs(5)), 0);
        let held = state.get(id).unwrap();
        let _busy = held.lock().unwrap();
        assert_eq!(state.evict_idle(created + Duration::from_secs(60)), 0);
        drop(_busy);
        assert_eq!(state.evict_idle(created + Duration::from_secs(60)), 1);
        assert!(state.is_empty());
    }

    #[test]
    fn held_session_is_a_conflict() {
        let session: Shared = Arc::new(Mutex::new(GameSession::new(
            Uuid::new_v4(),
            FirstPlayer::Human,
            PolicyMode::Safe,
            1,
        )));
        let _held = session.lock().unwrap();
        assert!(matches!(lock(&session), Err(ApiError::Conflict(_))));
    }
}
