import { CommandRequest } from "./types.js";

/**
 * What a confirming ui_event must show for a given command.
 *
 * An empty match means "any subsequent panel update for the service settles
 * it" - the fallback for actions whose resulting state isn't predictable
 * client-side (door open depends on the password, auto lighting on lux).
 */
export function confirmationMatch(cmd: CommandRequest): Record<string, unknown> {
  const params = cmd.params ?? {};
  switch (`${cmd.service}/${cmd.action}`) {
    case "lighting/set_rgb":
      return { rgb: params.rgb };
    case "intrusion/arm":
      return { armed: true };
    case "intrusion/disarm":
      return { armed: false };
    case "door/close":
      return { door: "closed" };
    case "medicine/set_mode":
      return { mode: params.mode };
    default:
      return {};
  }
}
