// Pedal click feedback. One sound per snapshot whose minimap carries a
// click event, so the audible count always equals the click-event count.

export class ClickSounder {
  count = 0;
  private ctx: AudioContext | null = null;

  constructor(private enabled: boolean = true) {}

  /** Call once per received snapshot. Returns true when a click played. */
  onSnapshot(click: boolean): boolean {
    if (!click) return false;
    this.count += 1;
    if (this.enabled) this.beep();
    return true;
  }

  private beep() {
    try {
      if (!this.ctx) {
        const Ctor = (window as unknown as { AudioContext?: typeof AudioContext })
          .AudioContext;
        if (!Ctor) return;
        this.ctx = new Ctor();
      }
      const osc = this.ctx.createOscillator();
      const gain = this.ctx.createGain();
      osc.frequency.value = 1100;
      gain.gain.setValueAtTime(0.12, this.ctx.currentTime);
      gain.gain.exponentialRampToValueAtTime(0.001, this.ctx.currentTime + 0.06);
      osc.connect(gain).connect(this.ctx.destination);
      osc.start();
      osc.stop(this.ctx.currentTime + 0.07);
    } catch {
      // audio is feedback only; never let it break the console
    }
  }
}
