// React act() support outside a jest-style runner.
(globalThis as Record<string, unknown>).IS_REACT_ACT_ENVIRONMENT = true;
