//! Picture decoder.

use super::recon::FrameState;
use super::syntax::{read_cu, CodingUnit, SyntaxCtx};
use crate::bitio::BitReader;
use crate::ibc::{CTU_SIZE, REGION_SIZE};
use crate::Result;

pub(crate) struct DecodedPicture {
    pub state: FrameState,
    pub cus: Vec<CodingUnit>,
}

struct PictureDecoder<'a, 'b> {
    st: FrameState,
    r: &'b mut BitReader<'a>,
    cus: Vec<CodingUnit>,
}

impl PictureDecoder<'_, '_> {
    fn node(&mut self, x: usize, y: usize, size: usize) -> Result<()> {
        let (pw, ph) = (self.st.ctx.width, self.st.ctx.height);
        if x >= pw || y >= ph {
            return Ok(());
        }
        let partial = x + size > pw || y + size > ph;
        let split = partial || size > self.st.ctx.min_cu() && self.r.read_flag()?;
        if split {
            let half = size / 2;
            for (dx, dy) in [(0, 0), (half, 0), (0, half), (half, half)] {
                self.node(x + dx, y + dy, half)?;
            }
            return Ok(());
        }
        let cu = read_cu(self.r, &self.st.ctx, &self.st.parse_state(), x, y, size)?;
        let recon = self.st.reconstruct(&cu)?;
        self.st.commit(&cu, &recon)?;
        self.cus.push(cu);
        Ok(())
    }
}

pub(crate) fn decode_picture(payload: &[u8], ctx: SyntaxCtx) -> Result<DecodedPicture> {
    let (pw, ph) = (ctx.width, ctx.height);
    let mut r = BitReader::new(payload);
    let mut d = PictureDecoder {
        st: FrameState::new(ctx),
        r: &mut r,
        cus: Vec::new(),
    };
    for cy in (0..ph).step_by(CTU_SIZE) {
        for cx in (0..pw).step_by(CTU_SIZE) {
            if cx == 0 {
                d.st.reset_row();
            }
            d.st.rsm.begin_ctu(cx, cy);
            for region in 0..4 {
                let (nx, ny) = (
                    cx + (region % 2) * REGION_SIZE,
                    cy + (region / 2) * REGION_SIZE,
                );
                if nx >= pw || ny >= ph {
                    continue;
                }
                d.st.rsm.enter_region(region);
                d.node(nx, ny, REGION_SIZE)?;
            }
        }
    }
    let (st, cus) = (d.st, d.cus);
    r.finish()?;
    Ok(DecodedPicture { state: st, cus })
}
