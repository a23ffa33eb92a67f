use crate::blocktree::{GameState, Miner, Publication};
use crate::strategies::{Capitulation, Decision, Frontier, Strategy, StrategyError, StrategyId};

/// A private copy of the game in which the wrapped strategy plays,
/// fed the same creator draws as the real game.
pub(crate) struct Shadow {
    state: Option<GameState>,
    inner: Box<dyn Strategy>,
    miner2: Frontier,
}

impl Shadow {
    pub(crate) fn new(inner: Box<dyn Strategy>) -> Self {
        Shadow {
            state: None,
            inner,
            miner2: Frontier::new(Miner::Two),
        }
    }

    pub(crate) fn inner_id(&self) -> StrategyId {
        self.inner.id()
    }

    pub(crate) fn state(&self) -> &GameState {
        self.state.as_ref().expect("shadow started")
    }

    /// True on the first round seen; the shadow then starts as a copy of
    /// the real half state.
    pub(crate) fn advance(&mut self, real_half: &GameState, creator: Miner) -> Result<bool, StrategyError> {
        let round = real_half.round();
        let Some(state) = self.state.as_mut() else {
            self.state = Some(real_half.clone());
            return Ok(true);
        };
        state.create_block(creator);
        if state.round() != round {
            return Err(StrategyError::Inner {
                round,
                detail: format!("shadow at round {} but real game at {round}", state.round()),
            });
        }
        let d = self.miner2.decide(state, creator)?;
        state.apply(Miner::Two, &d.action).map_err(|e| StrategyError::Inner {
            round,
            detail: format!("shadow Miner 2: {e}"),
        })?;
        Ok(false)
    }

    /// Lets the inner strategy act in the shadow. `inspect` sees the
    /// shadow half state and the validated publication before it is applied.
    pub(crate) fn act<R>(
        &mut self,
        creator: Miner,
        inspect: impl FnOnce(&GameState, &Publication) -> R,
    ) -> Result<(Decision, Publication, R), StrategyError> {
        let state = self.state.as_mut().expect("advance first");
        let round = state.round();
        let d = self.inner.decide(state, creator)?;
        let p = state.validate(Miner::One, &d.action).map_err(|e| StrategyError::Inner {
            round,
            detail: format!("inner played invalid {}: {e}", d.action),
        })?;
        let r = inspect(state, &p);
        state.apply(Miner::One, &d.action).expect("validated");
        Ok((d, p, r))
    }

    /// Performs the inner strategy's capitulation in the shadow and returns
    /// the height, to be mirrored in the real game.
    pub(crate) fn capitulate(&mut self, c: Option<Capitulation>) -> Result<Option<u64>, StrategyError> {
        let Some(c) = c else { return Ok(None) };
        let state = self.state.as_mut().expect("advance first");
        let h = c.height(state);
        state.capitulate(h).map_err(|e| StrategyError::Inner {
            round: state.round(),
            detail: format!("shadow capitulation: {e}"),
        })?;
        Ok(Some(h))
    }
}
