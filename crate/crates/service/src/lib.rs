//! HTTP session service for interactive solution design.
//!
//! A session starts from the customer's demographics, is offered hybrid
//! recommendations, and grows as the consultant selects elements. Each
//! selection extends the query, which shifts the hybrid from case retrieval
//! towards the graph walk.
//!
//! | method | path                                  |
//! |--------|---------------------------------------|
//! | POST   | `/sessions`                           |
//! | GET    | `/sessions/{id}/recommendations?limit=N` |
//! | POST   | `/sessions/{id}/selections`           |
//! | GET    | `/sessions/{id}/solution`             |
//! | GET    | `/meta/taxonomy`                      |
//! | GET    | `/meta/processes`                     |

mod api;
pub mod error;
pub mod journal;
pub mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use chrono::Utc;

pub use api::router;
pub use error::{ApiError, ErrorBody};
use journal::{Journal, JournalEvent};
use session::{CreateSession, Engine, SelectionItem, Session, SessionView};

pub const DEFAULT_LIMIT: usize = 10;

pub struct AppState {
    engine: Engine,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    journal: Option<Journal>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        Self { engine, sessions: RwLock::new(HashMap::new()), journal: None }
    }

    /// Replays the sessions recorded in `journal` and appends new events to it.
    pub fn with_journal(engine: Engine, journal: Journal) -> std::io::Result<Self> {
        let mut sessions: HashMap<String, Session> = HashMap::new();
        for event in Journal::read(journal.path())? {
            match event {
                JournalEvent::Created { session, at, query } => {
                    sessions.insert(session.clone(), Session::new(session, query, at));
                }
                JournalEvent::Selected { session, elements } => match sessions.get_mut(&session) {
                    Some(s) => s.restore(&elements),
                    None => log::warn!("journal selects into unknown session {session:?}"),
                },
            }
        }
        log::info!("restored {} sessions from {}", sessions.len(), journal.path().display());
        let sessions = sessions.into_iter().map(|(id, s)| (id, Arc::new(Mutex::new(s)))).collect();
        Ok(Self { engine, sessions: RwLock::new(sessions), journal: Some(journal) })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    fn record(&self, event: &JournalEvent) -> Result<(), ApiError> {
        match &self.journal {
            Some(j) => j.append(event).map_err(|e| ApiError::internal(format!("journal write failed: {e}"))),
            None => Ok(()),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let sessions = self.sessions.read().unwrap_or_else(|e| e.into_inner());
        sessions.get(id).cloned().ok_or_else(|| ApiError::unknown_session(id))
    }

    /// Runs `f` with the session locked; mutations of one session are serialised.
    pub fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let session = self.session(id)?;
        let mut guard = session.lock().unwrap_or_else(|e| e.into_inner());
        f(&mut guard)
    }

    pub fn create_session(&self, req: &CreateSession) -> Result<SessionView, ApiError> {
        let query = self.engine.initial_query(req)?;
        let session = Session::new(uuid::Uuid::new_v4().to_string(), query, Utc::now());
        self.record(&JournalEvent::Created {
            session: session.id.clone(),
            at: session.created_at,
            query: session.query.clone(),
        })?;
        let view = self.engine.view(&session);
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(view)
    }

    pub fn select(&self, id: &str, items: &[SelectionItem]) -> Result<SessionView, ApiError> {
        let resolved = self.engine.resolve_selection(items)?;
        self.with_session(id, |session| {
            let mut trial = session.clone();
            let added = trial.select(resolved, Utc::now());
            if !added.is_empty() {
                self.record(&JournalEvent::Selected { session: id.to_string(), elements: added })?;
                *session = trial;
            }
            Ok(self.engine.view(session))
        })
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
